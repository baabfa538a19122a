use super::{BinaryOp, Expr, Node};

pub(crate) fn differentiate(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(name) => {
            if &**name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Neg(a) => differentiate(a, var).neg(),
        Node::Binary(op, a, b) => {
            let da = differentiate(a, var);
            let db = differentiate(b, var);
            match op {
                BinaryOp::Add => da.add(db),
                BinaryOp::Sub => da.sub(db),
                BinaryOp::Mul => da.mul(b.clone()).add(a.clone().mul(db)),
                BinaryOp::Div => {
                    if db.is_zero() {
                        da.div(b.clone())
                    } else {
                        da.mul(b.clone())
                            .sub(a.clone().mul(db))
                            .div(b.clone().powf(2.0))
                    }
                }
            }
        }
        Node::Pow(base, exponent) => {
            let dbase = differentiate(base, var);
            if !exponent.depends_on(var) {
                // d(a^k) = k a^(k-1) a'
                let reduced = match exponent.as_constant() {
                    Some(k) => Expr::constant(k - 1.0),
                    None => exponent.clone().sub(Expr::one()),
                };
                exponent
                    .clone()
                    .mul(base.clone().pow(reduced))
                    .mul(dbase)
            } else {
                // d(a^b) = a^b (b' ln a + b a'/a)
                let dexp = differentiate(exponent, var);
                let log_term = dexp.mul(base.clone().ln());
                let base_term = exponent.clone().mul(dbase).div(base.clone());
                e.clone().mul(log_term.add(base_term))
            }
        }
        Node::Ln(a) => differentiate(a, var).div(a.clone()),
        Node::Exp(a) => e.clone().mul(differentiate(a, var)),
    }
}
