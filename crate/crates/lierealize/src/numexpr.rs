//! Numeric-only expression trees for coordinate maps that leave the exact
//! class: square roots, arctangent and inverse cotangent never enter `Expr`.
//!
//! These are evaluated, never differentiated symbolically.

use crate::symexpr::EvalError;
use std::collections::BTreeMap;

const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum NumExpr {
    Const(f64),
    /// 1-based coordinate index.
    Var(u32),
    Param(String),
    Add(Box<NumExpr>, Box<NumExpr>),
    Sub(Box<NumExpr>, Box<NumExpr>),
    Mul(Box<NumExpr>, Box<NumExpr>),
    Div(Box<NumExpr>, Box<NumExpr>),
    Neg(Box<NumExpr>),
    Pow(Box<NumExpr>, i32),
    Sin(Box<NumExpr>),
    Cos(Box<NumExpr>),
    Tan(Box<NumExpr>),
    Sqrt(Box<NumExpr>),
    Atan(Box<NumExpr>),
    /// Two-argument arctangent, used to invert stereographic-type maps
    /// without branch trouble.
    Atan2(Box<NumExpr>, Box<NumExpr>),
    /// Inverse cotangent with range (0, pi).
    Acot(Box<NumExpr>),
}

impl NumExpr {
    pub fn var(v: u32) -> Self {
        NumExpr::Var(v)
    }

    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        use NumExpr::*;
        Ok(match self {
            Const(c) => *c,
            Var(v) => *point.get(*v as usize - 1).ok_or(EvalError::PointDim {
                got: point.len(),
                need: *v as usize,
            })?,
            Param(name) => *params
                .get(name)
                .ok_or_else(|| EvalError::UnboundParam(name.clone()))?,
            Add(a, b) => a.eval(point, params)? + b.eval(point, params)?,
            Sub(a, b) => a.eval(point, params)? - b.eval(point, params)?,
            Mul(a, b) => a.eval(point, params)? * b.eval(point, params)?,
            Div(a, b) => {
                let d = b.eval(point, params)?;
                if d.abs() < SINGULAR_EPS {
                    return Err(EvalError::DivisionByZero {
                        context: "numeric denominator".into(),
                    });
                }
                a.eval(point, params)? / d
            }
            Neg(a) => -a.eval(point, params)?,
            Pow(a, k) => {
                let v = a.eval(point, params)?;
                if *k < 0 && v.abs() < SINGULAR_EPS {
                    return Err(EvalError::DivisionByZero {
                        context: "numeric base with negative power".into(),
                    });
                }
                v.powi(*k)
            }
            Sin(a) => a.eval(point, params)?.sin(),
            Cos(a) => a.eval(point, params)?.cos(),
            Tan(a) => {
                let v = a.eval(point, params)?;
                if v.cos().abs() < SINGULAR_EPS {
                    return Err(EvalError::DivisionByZero {
                        context: "tan at odd multiple of pi/2".into(),
                    });
                }
                v.tan()
            }
            Sqrt(a) => {
                let v = a.eval(point, params)?;
                if v < 0.0 {
                    return Err(EvalError::NegativeSqrt(v));
                }
                v.sqrt()
            }
            Atan(a) => a.eval(point, params)?.atan(),
            Atan2(y, x) => {
                let yv = y.eval(point, params)?;
                let xv = x.eval(point, params)?;
                yv.atan2(xv)
            }
            Acot(a) => {
                // acot into (0, pi): pi/2 - atan
                std::f64::consts::FRAC_PI_2 - a.eval(point, params)?.atan()
            }
        })
    }
}

// small combinators keep map definitions readable
pub fn add(a: NumExpr, b: NumExpr) -> NumExpr {
    NumExpr::Add(Box::new(a), Box::new(b))
}
pub fn mul(a: NumExpr, b: NumExpr) -> NumExpr {
    NumExpr::Mul(Box::new(a), Box::new(b))
}
pub fn div(a: NumExpr, b: NumExpr) -> NumExpr {
    NumExpr::Div(Box::new(a), Box::new(b))
}
pub fn sin(a: NumExpr) -> NumExpr {
    NumExpr::Sin(Box::new(a))
}
pub fn cos(a: NumExpr) -> NumExpr {
    NumExpr::Cos(Box::new(a))
}
pub fn sqrt(a: NumExpr) -> NumExpr {
    NumExpr::Sqrt(Box::new(a))
}
pub fn atan2(y: NumExpr, x: NumExpr) -> NumExpr {
    NumExpr::Atan2(Box::new(y), Box::new(x))
}
pub fn acot(a: NumExpr) -> NumExpr {
    NumExpr::Acot(Box::new(a))
}
pub fn pow(a: NumExpr, k: i32) -> NumExpr {
    NumExpr::Pow(Box::new(a), k)
}

/// cot x = cos x / sin x.
pub fn cot(a: NumExpr) -> NumExpr {
    div(cos(a.clone()), sin(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_basic() {
        let params = BTreeMap::new();
        let e = add(mul(NumExpr::var(1), NumExpr::var(1)), NumExpr::Const(1.0));
        assert_eq!(e.eval(&[2.0], &params).unwrap(), 5.0);
    }

    #[test]
    fn acot_range() {
        let params = BTreeMap::new();
        let e = acot(NumExpr::var(1));
        let v = e.eval(&[1.0], &params).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        // negative argument lands in (pi/2, pi)
        let v = e.eval(&[-1.0], &params).unwrap();
        assert!(v > std::f64::consts::FRAC_PI_2 && v < std::f64::consts::PI);
    }

    #[test]
    fn sqrt_of_negative_errors() {
        let params = BTreeMap::new();
        let e = sqrt(NumExpr::var(1));
        assert!(matches!(
            e.eval(&[-1.0], &params),
            Err(crate::symexpr::EvalError::NegativeSqrt(_))
        ));
    }
}
