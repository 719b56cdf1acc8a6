use nooplab::auditor::{audit_program, contravariant_self_references, BinaryKind};
use nooplab::corpus::{random_program, HierarchyConfig, CORPUS};
use nooplab::nominal::verify_inheritance_is_subtyping;
use nooplab::structural::universe::random_mu_type;
use nooplab::structural::{struct_subtype, StructuralType, StructuralTypes};
use nooplab::syntax::{class_graph, parse_program, pretty_print};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn pretty_printing_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let program = random_program(&mut rng, HierarchyConfig::default());
        let text = pretty_print(&program);
        prop_assert_eq!(parse_program(&text).unwrap(), program);
    }

    #[test]
    fn parser_never_panics(src in "[a-zA-Z(){};.,/@ \n]{0,120}") {
        let _ = parse_program(&src);
    }

    #[test]
    fn parser_never_panics_on_token_soup(
        tokens in proptest::collection::vec(
            prop_oneof![
                Just("class"), Just("extends"), Just("return"), Just("new"), Just("this"),
                Just("instanceof"), Just("A"), Just("Object"), Just("x"), Just("("), Just(")"),
                Just("{"), Just("}"), Just(";"), Just("."), Just(","),
            ],
            0..60,
        )
    ) {
        let _ = parse_program(&tokens.join(" "));
    }

    #[test]
    fn canonical_types_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = random_mu_type(&mut rng, 3);
        let parsed: StructuralType = ty.to_string().parse().unwrap();
        prop_assert_eq!(parsed, ty);
    }
}

#[test]
fn inheritance_is_nominal_subtyping_on_random_hierarchies() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let program = random_program(&mut rng, HierarchyConfig::default());
        let report = verify_inheritance_is_subtyping(&program).unwrap();
        let n = program.classes().len() + 1;
        assert_eq!(report.entries.len(), n * n);
        assert!(report.holds(), "{}", pretty_print(&program));
    }
}

#[test]
fn audit_matrix_is_complete_and_theorem_column_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let program = random_program(&mut rng, HierarchyConfig::default());
        let report = audit_program(&program).unwrap();
        let n = program.classes().len() + 1;
        assert_eq!(report.pairs.len(), n * n);
        assert!(report.pairs.iter().all(|p| p.inherits == p.nominal_sub));
        let mut sorted = report.pairs.clone();
        sorted.sort_by(|a, b| (&a.sub, &a.sup).cmp(&(&b.sub, &b.sup)));
        assert_eq!(sorted, report.pairs);
    }
}

/// Without overrides, a subclass can only fail to be a structural subtype of
/// an ancestor through a self reference in a parameter position.
#[test]
fn structural_divergence_needs_contravariant_self_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let config = HierarchyConfig {
        overrides: false,
        ..HierarchyConfig::default()
    };
    let mut divergent = 0;
    for _ in 0..300 {
        let program = random_program(&mut rng, config);
        let types = StructuralTypes::build(&program).unwrap();
        let graph = class_graph(&program).unwrap();
        let broken = program.audited_names().into_iter().any(|sub| {
            graph.ancestors(&sub).any(|sup| {
                !struct_subtype(types.get(&sub).unwrap(), types.get(sup).unwrap())
            })
        });
        if broken {
            divergent += 1;
            assert!(
                !contravariant_self_references(&program, &types).is_empty(),
                "{}",
                pretty_print(&program)
            );
        }
    }
    assert!(divergent > 0, "the sample never exercised the property");
}

#[test]
fn approximation_depth_grows_by_one_per_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..200 {
        let program = random_program(&mut rng, HierarchyConfig::default());
        let report = audit_program(&program).unwrap();
        let graph = class_graph(&program).unwrap();
        for f in &report.findings {
            if !matches!(f.kind, BinaryKind::DeclaredBinary | BinaryKind::ApproximatedBinary) {
                continue;
            }
            for child in graph.children(&f.class) {
                let overrides = program.class(child).unwrap().method(&f.method).is_some();
                if overrides {
                    continue;
                }
                assert!(
                    report.findings.iter().any(|g| g.class == *child
                        && g.method == f.method
                        && g.kind == BinaryKind::ApproximatedBinary
                        && g.depth == f.depth + 1),
                    "{f:?} in {}",
                    pretty_print(&program)
                );
            }
        }
    }
}

#[test]
fn corpus_round_trips_through_the_pretty_printer() {
    for entry in CORPUS {
        let program = entry.program();
        assert_eq!(parse_program(&pretty_print(&program)).unwrap(), program, "{}", entry.name);
    }
}
