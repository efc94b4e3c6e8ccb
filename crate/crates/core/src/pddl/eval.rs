use super::expr::{ArithOp, CmpOp, Expr};
use super::fluent::{ratio, FluentSource};

/// Evaluates a boolean-typed expression.
///
/// The parser guarantees operand types, so evaluation is total. Passing a
/// numeric expression is a programming error and panics.
pub fn eval_bool(e: &Expr, src: &impl FluentSource) -> bool {
    match e {
        Expr::And(xs) => xs.iter().all(|x| eval_bool(x, src)),
        Expr::Or(xs) => xs.iter().any(|x| eval_bool(x, src)),
        Expr::Not(x) => !eval_bool(x, src),
        Expr::Cmp(op, a, b) => {
            if a.value_type() == super::ValueType::Bool {
                // only `=` admits boolean operands
                return eval_bool(a, src) == eval_bool(b, src);
            }
            let (a, b) = (eval_num(a, src), eval_num(b, src));
            match op {
                CmpOp::Gt => a > b,
                CmpOp::Lt => a < b,
                CmpOp::Eq => a == b,
            }
        }
        Expr::Fluent(f) => src.boolean(*f),
        Expr::Arith(..) | Expr::Literal(_) => panic!("eval_bool on numeric expression {e}"),
    }
}

/// Evaluates a numeric-typed expression. Division by zero yields 0.
pub fn eval_num(e: &Expr, src: &impl FluentSource) -> f64 {
    match e {
        Expr::Literal(v) => *v,
        Expr::Fluent(f) => src.number(*f),
        Expr::Arith(op, xs) => {
            let mut vals = xs.iter().map(|x| eval_num(x, src));
            let first = vals.next().expect("arith has at least two operands");
            match op {
                ArithOp::Add => vals.fold(first, |acc, v| acc + v),
                ArithOp::Sub => vals.fold(first, |acc, v| acc - v),
                ArithOp::Mul => vals.fold(first, |acc, v| acc * v),
                ArithOp::Div => ratio(first, vals.next().expect("binary division")),
            }
        }
        _ => panic!("eval_num on boolean expression {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_goal, parse_metric, EpisodeFluents};

    const FIG4_GOAL: &str = "(:goal (or (and (not red-inactive) (not real-compromise) (declared-victory)) \
                             (and (red-inactive) (= nontrivial-blue-actions 0))))";
    const FIG4_METRIC: &str = "(:metric minimize (+ (/ nontrivial-blue-actions steps-to-survive) \
                               (/ bad-qos-events (+ bad-qos-events good-qos-events))))";

    #[test]
    fn pair_42_goal() {
        let g = parse_goal("(:goal (and (not real-compromise) (red-declared-victory)))").unwrap();
        let mut fl = EpisodeFluents::fresh(20);
        fl.declared_victory = true;
        assert!(eval_bool(&g, &fl));
        fl.real_compromise = true;
        assert!(!eval_bool(&g, &fl));
    }

    #[test]
    fn goal_one_strict_boundary() {
        let g = parse_goal("(:goal (> nontrivial-blue-actions 0))").unwrap();
        let mut fl = EpisodeFluents::fresh(20);
        assert!(!eval_bool(&g, &fl));
        fl.nontrivial_blue_actions = 1;
        assert!(eval_bool(&g, &fl));
    }

    #[test]
    fn figure_four_goal_inactive_and_passive() {
        let g = parse_goal(FIG4_GOAL).unwrap();
        let fl = EpisodeFluents::fresh(20);
        assert!(fl.red_inactive);
        assert!(eval_bool(&g, &fl));
    }

    #[test]
    fn figure_four_metric_zero_rule() {
        let m = parse_metric(FIG4_METRIC).unwrap();
        let fl = EpisodeFluents::fresh(20);
        assert_eq!(eval_num(&m, &fl), 0.0);
    }

    #[test]
    fn pair_39_metric() {
        let m = parse_metric("(:metric minimize (/ nontrivial-blue-actions steps-to-survive))").unwrap();
        let mut fl = EpisodeFluents::fresh(20);
        fl.nontrivial_blue_actions = 2;
        assert!((eval_num(&m, &fl) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn pair_5_metric() {
        let m =
            parse_metric("(:metric minimize (+ (/ nontrivial-blue-actions steps-to-survive) (qos-penalty)) )").unwrap();
        let mut fl = EpisodeFluents::fresh(10);
        fl.nontrivial_blue_actions = 5;
        fl.bad_qos_events = 1;
        fl.good_qos_events = 3;
        assert!((eval_num(&m, &fl) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn subtraction_and_product_fold_left() {
        let fl = EpisodeFluents::fresh(10);
        assert_eq!(eval_num(&parse_metric("(- 10 3 2)").unwrap(), &fl), 5.0);
        assert_eq!(eval_num(&parse_metric("(* 2 3 4)").unwrap(), &fl), 24.0);
        assert_eq!(eval_num(&parse_metric("(/ 1 (- 2 2))").unwrap(), &fl), 0.0);
    }
}
