//! Determinants evaluated independently of the LU route used by the engine.

use nalgebra::DMatrix;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.sub(two_prod(q1, d).into_dd());
        let q2 = r.hi / d;
        quick_two_sum(q1, q2)
    }

    /// Exact scaling by a power of two.
    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn exp(x: f64) -> Dd {
        let k = (x / std::f64::consts::LN_2).round();
        let r = Dd::from(x).sub(Dd::LN2.mul(Dd::from(k)));
        // |r| <= ln2 / 2: 30 Taylor terms reach below 1e-33
        let mut term = Dd::from(1.0);
        let mut sum = Dd::from(1.0);
        for n in 1..30 {
            term = term.mul(r).div_f64(n as f64);
            sum = sum.add(term);
        }
        sum.ldexp(k as i32)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

trait IntoDd {
    fn into_dd(self) -> Dd;
}

impl IntoDd for Dd {
    fn into_dd(self) -> Dd {
        self
    }
}

/// `|det(M_reac(tau) - 1)|` from the `2x2` matrix
/// `[[cosh x - 1, sinh x], [sinh x, cosh x - 1]]`, `x = Lambda tau`, with
/// entries and products carried in double-double precision.
pub fn reaction_trace_determinant_extended(lambda_tau: f64) -> f64 {
    let ep = Dd::exp(lambda_tau);
    let em = Dd::exp(-lambda_tau);
    let cosh = ep.add(em).div_f64(2.0);
    let sinh = ep.sub(em).div_f64(2.0);
    let a = cosh.sub(Dd::from(1.0));
    a.mul(a).sub(sinh.mul(sinh)).to_f64().abs()
}

/// Determinant by cofactor expansion along the first row; for small
/// matrices only (cost grows as `n!`).
pub fn cofactor_determinant(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => {
            let mut det = 0.0;
            for col in 0..n {
                if m[(0, col)] == 0.0 {
                    continue;
                }
                let minor = m.clone().remove_row(0).remove_column(col);
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * m[(0, col)] * cofactor_determinant(&minor);
            }
            det
        }
    }
}
