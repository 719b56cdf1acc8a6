use std::fmt::Write;

use super::ast::{ClassDecl, Expr};
use super::program::Program;

/// Renders a program back to source. `parse_program(&pretty_print(p)) == Ok(p)`.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, class) in program.classes().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_class(&mut out, class);
    }
    if let Some(main) = program.main() {
        if !program.classes().is_empty() {
            out.push('\n');
        }
        out.push_str(&print_expr(main));
        out.push('\n');
    }
    out
}

fn write_class(out: &mut String, class: &ClassDecl) {
    for contract in &class.contracts {
        let _ = writeln!(out, "//@ {contract}");
    }
    let _ = write!(out, "class {}", class.name);
    if !class.super_name.is_object() {
        let _ = write!(out, " extends {}", class.super_name);
    }
    if class.fields.is_empty() && class.methods.is_empty() {
        out.push_str(" { }\n");
        return;
    }
    out.push_str(" {\n");
    for field in &class.fields {
        let _ = writeln!(out, "  {} {};", field.ty, field.name);
    }
    for method in &class.methods {
        let params = method
            .params
            .iter()
            .map(|p| format!("{} {}", p.ty, p.name))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(
            out,
            "  {} {}({}) {{ return {}; }}",
            method.ret,
            method.name,
            params,
            print_expr(&method.body)
        );
    }
    out.push_str("}\n");
}

pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

fn write_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Var(v) => out.push_str(v.as_str()),
        Expr::This => out.push_str("this"),
        Expr::FieldGet(recv, label) => {
            write_receiver(out, recv);
            let _ = write!(out, ".{label}");
        }
        Expr::Invoke(recv, label, args) => {
            write_receiver(out, recv);
            let _ = write!(out, ".{label}(");
            write_args(out, args);
            out.push(')');
        }
        Expr::New(class, args) => {
            let _ = write!(out, "new {class}(");
            write_args(out, args);
            out.push(')');
        }
        Expr::Cast(class, inner) => {
            let _ = write!(out, "({class}) ");
            write_expr(out, inner);
        }
        Expr::InstanceOf(inner, class) => {
            write_receiver(out, inner);
            let _ = write!(out, " instanceof {class}");
        }
    }
}

/// A cast operand extends as far right as possible, so a cast in receiver
/// position needs parentheses.
fn write_receiver(out: &mut String, recv: &Expr) {
    if matches!(recv, Expr::Cast(..)) {
        out.push('(');
        write_expr(out, recv);
        out.push(')');
    } else {
        write_expr(out, recv);
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, arg);
    }
}
