//! Second-order forward-mode jets: value, gradient, and Hessian propagate
//! together through arithmetic, so first and second derivatives are exact
//! (no truncation) up to rounding.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::expr::{BinOp, Expr, Func};

/// Value, gradient, and symmetric Hessian of a scalar quantity with respect
/// to `dim` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    /// Jet of a constant: zero gradient and Hessian.
    pub fn constant(dim: usize, value: f64) -> Jet2 {
        Jet2 {
            value,
            grad: DVector::zeros(dim),
            hess: DMatrix::zeros(dim, dim),
        }
    }

    /// Jet of the `index`-th coordinate: gradient is the standard basis
    /// vector, Hessian zero.
    pub fn coordinate(dim: usize, index: usize, value: f64) -> Jet2 {
        let mut grad = DVector::zeros(dim);
        grad[index] = 1.0;
        Jet2 {
            value,
            grad,
            hess: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn add(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: &self.grad + &rhs.grad,
            hess: &self.hess + &rhs.hess,
        }
    }

    fn sub(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: &self.grad - &rhs.grad,
            hess: &self.hess - &rhs.hess,
        }
    }

    fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: -&self.grad,
            hess: -&self.hess,
        }
    }

    fn mul(&self, rhs: &Jet2) -> Jet2 {
        let cross = &self.grad * rhs.grad.transpose();
        Jet2 {
            value: self.value * rhs.value,
            grad: &self.grad * rhs.value + &rhs.grad * self.value,
            hess: &self.hess * rhs.value + &rhs.hess * self.value + &cross + cross.transpose(),
        }
    }

    fn div(&self, rhs: &Jet2) -> Result<Jet2> {
        if rhs.value == 0.0 {
            return Err(GeomError::DomainError {
                detail: "division by zero".into(),
            });
        }
        Ok(self.mul(&rhs.recip()))
    }

    fn recip(&self) -> Jet2 {
        let inv = 1.0 / self.value;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    /// Chain rule for a scalar function with derivatives `fp`, `fpp` at the
    /// jet's value.
    fn chain(&self, f: f64, fp: f64, fpp: f64) -> Jet2 {
        let outer = &self.grad * self.grad.transpose();
        Jet2 {
            value: f,
            grad: &self.grad * fp,
            hess: &self.hess * fp + outer * fpp,
        }
    }

    fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    fn tan(&self) -> Result<Jet2> {
        let t = self.value.tan();
        if !t.is_finite() {
            return Err(GeomError::DomainError {
                detail: "tan at a pole".into(),
            });
        }
        let sec2 = 1.0 + t * t;
        Ok(self.chain(t, sec2, 2.0 * t * sec2))
    }

    fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn log(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(GeomError::DomainError {
                detail: format!("log of non-positive value {}", self.value),
            });
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(self.value.ln(), inv, -inv * inv))
    }

    fn sqrt(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(GeomError::DomainError {
                detail: format!("sqrt of non-positive value {}", self.value),
            });
        }
        let r = self.value.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * self.value)))
    }

    fn pow_const(&self, exponent: f64) -> Result<Jet2> {
        let u = self.value;
        if exponent.fract() == 0.0 {
            let n = exponent as i32;
            if u == 0.0 && n < 0 {
                return Err(GeomError::DomainError {
                    detail: "zero raised to a negative power".into(),
                });
            }
            // u^(n-2) stays finite for u = 0 because the factor n(n-1) kills
            // the negative powers that would otherwise appear for n in {0, 1}
            let f = u.powi(n);
            let fp = if n == 0 { 0.0 } else { exponent * u.powi(n - 1) };
            let fpp = if n == 0 || n == 1 {
                0.0
            } else {
                exponent * (exponent - 1.0) * u.powi(n - 2)
            };
            Ok(self.chain(f, fp, fpp))
        } else if u > 0.0 {
            let f = u.powf(exponent);
            let fp = exponent * u.powf(exponent - 1.0);
            let fpp = exponent * (exponent - 1.0) * u.powf(exponent - 2.0);
            Ok(self.chain(f, fp, fpp))
        } else {
            Err(GeomError::DomainError {
                detail: format!("non-positive base {u} with fractional exponent"),
            })
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite())
    }
}

/// Evaluate the full second-order jet of `expr` at `point`, with parameters
/// bound by position in `names`.
pub fn evaluate_jet2(expr: &Expr, names: &[String], point: &[f64]) -> Result<Jet2> {
    debug_assert_eq!(names.len(), point.len());
    let jet = eval_node(expr, names, point)?;
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(GeomError::DomainError {
            detail: "jet evaluation produced a non-finite derivative".into(),
        })
    }
}

fn eval_node(expr: &Expr, names: &[String], point: &[f64]) -> Result<Jet2> {
    let dim = point.len();
    match expr {
        Expr::Literal(v) => Ok(Jet2::constant(dim, *v)),
        Expr::Param(name) => {
            let idx = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| GeomError::UnknownIdentifier { name: name.clone() })?;
            Ok(Jet2::coordinate(dim, idx, point[idx]))
        }
        Expr::Neg(inner) => Ok(eval_node(inner, names, point)?.neg()),
        Expr::Binary(op, a, b) => {
            let x = eval_node(a, names, point)?;
            match op {
                BinOp::Add => Ok(x.add(&eval_node(b, names, point)?)),
                BinOp::Sub => Ok(x.sub(&eval_node(b, names, point)?)),
                BinOp::Mul => Ok(x.mul(&eval_node(b, names, point)?)),
                BinOp::Div => x.div(&eval_node(b, names, point)?),
                BinOp::Pow => {
                    let exponent = b.const_value().ok_or_else(|| GeomError::InvalidChart {
                        detail: "exponent is not a constant".into(),
                    })?;
                    x.pow_const(exponent)
                }
            }
        }
        Expr::Call(f, arg) => {
            let x = eval_node(arg, names, point)?;
            match f {
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Tan => x.tan(),
                Func::Exp => Ok(x.exp()),
                Func::Log => x.log(),
                Func::Sqrt => x.sqrt(),
            }
        }
    }
}
