use crate::error::{Error, Result};

/// Quintic smoothstep `t^3 (10 - 15 t + 6 t^2)`, clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

fn smoothstep_d1(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

fn smoothstep_d2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    }
}

/// Peak slope of [`smoothstep`] on `[0, 1]`, attained at `t = 1/2`.
pub const SMOOTHSTEP_MAX_SLOPE: f64 = 15.0 / 8.0;

/// C² approximation of the indicator of `[a, b]`.
///
/// The rising ramp spans `[a - 2ε, a + 2ε]`, the falling ramp
/// `[b - 2ε, b + 2ε]`; the function is exactly 1 between them and exactly 0
/// outside `[a - 2ε, b + 2ε]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    a: f64,
    b: f64,
    eps: f64,
}

impl Mollifier {
    pub fn new(a: f64, b: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::config("eps", format!("cutoff must be positive, got {eps}")));
        }
        if !(b - a > 4.0 * eps) {
            return Err(Error::config(
                "eps",
                format!("ramps overlap: b - a = {} must exceed 4*eps = {}", b - a, 4.0 * eps),
            ));
        }
        Ok(Mollifier { a, b, eps })
    }

    pub fn left(&self) -> f64 {
        self.a
    }

    pub fn right(&self) -> f64 {
        self.b
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn width(&self) -> f64 {
        4.0 * self.eps
    }

    pub fn eval(&self, x: f64) -> f64 {
        let e2 = 2.0 * self.eps;
        if x <= self.a - e2 || x >= self.b + e2 {
            0.0
        } else if x < self.a + e2 {
            smoothstep(0.5 + (x - self.a) / self.width())
        } else if x <= self.b - e2 {
            1.0
        } else {
            smoothstep(0.5 - (x - self.b) / self.width())
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let e2 = 2.0 * self.eps;
        let w = self.width();
        if x > self.a - e2 && x < self.a + e2 {
            smoothstep_d1((x - (self.a - e2)) / w) / w
        } else if x > self.b - e2 && x < self.b + e2 {
            -smoothstep_d1((self.b + e2 - x) / w) / w
        } else {
            0.0
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let e2 = 2.0 * self.eps;
        let w = self.width();
        if x > self.a - e2 && x < self.a + e2 {
            smoothstep_d2((x - (self.a - e2)) / w) / (w * w)
        } else if x > self.b - e2 && x < self.b + e2 {
            smoothstep_d2((self.b + e2 - x) / w) / (w * w)
        } else {
            0.0
        }
    }

    /// Upper bound on `|ψ'|`; equals `(15/8) / (4ε)`.
    pub fn max_slope(&self) -> f64 {
        SMOOTHSTEP_MAX_SLOPE / self.width()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let m = Mollifier::new(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(m.eval(0.0), 1.0);
        assert_eq!(m.eval(1.0), 0.5);
        assert_eq!(m.eval(1.3), 0.0);
        assert_eq!(m.eval(-1.0), 0.5);
    }

    #[test]
    fn overlapping_ramps_rejected() {
        assert!(Mollifier::new(0.0, 0.4, 0.1).is_err());
        assert!(Mollifier::new(0.0, 0.41, 0.1).is_ok());
        assert!(Mollifier::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn support_and_plateau() {
        let m = Mollifier::new(-1.0, 2.0, 0.05).unwrap();
        for i in 0..=4000 {
            let x = -3.0 + 6.0 * i as f64 / 4000.0;
            let v = m.eval(x);
            assert!((0.0..=1.0).contains(&v));
            if x <= -1.1 || x >= 2.1 {
                assert_eq!(v, 0.0, "x = {x}");
            }
            if (-0.9..=1.9).contains(&x) {
                assert_eq!(v, 1.0, "x = {x}");
            }
            let d = m.derivative(x);
            assert!(d.abs() <= m.max_slope() * (1.0 + 1e-12));
            if (-0.9..=1.9).contains(&x) || x <= -1.1 || x >= 2.1 {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn slope_scales_like_inverse_eps() {
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let m = Mollifier::new(-1.0, 1.0, eps).unwrap();
            assert!((m.max_slope() * eps - 15.0 / 32.0).abs() < 1e-15);
            // peak at the ramp midpoint
            assert!((m.derivative(-1.0) - m.max_slope()).abs() < 1e-12 / eps);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = Mollifier::new(-1.0, 1.0, 0.1).unwrap();
        let h = 1e-6;
        for i in 0..200 {
            let x = -1.2 + 0.4 * (i as f64 + 0.5) / 200.0;
            let fd1 = (m.eval(x + h) - m.eval(x - h)) / (2.0 * h);
            assert!((fd1 - m.derivative(x)).abs() < 1e-5, "x = {x}");
            let fd2 = (m.derivative(x + h) - m.derivative(x - h)) / (2.0 * h);
            assert!((fd2 - m.second_derivative(x)).abs() < 1e-3, "x = {x}");
        }
    }

    #[test]
    fn second_differences_converge_under_refinement() {
        // ψ'' is continuous: the discrete second difference approaches the
        // analytic value, including across the ramp edges.
        let m = Mollifier::new(-1.0, 1.0, 0.1).unwrap();
        let probes = [-1.2, -1.15, -1.0, -0.8, -0.79, 0.8, 1.0, 1.2];
        let mut prev = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3, 1.25e-3] {
            let worst = probes
                .iter()
                .map(|&x| {
                    let sd = (m.eval(x + h) - 2.0 * m.eval(x) + m.eval(x - h)) / (h * h);
                    (sd - m.second_derivative(x)).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst < prev, "h = {h}: {worst} !< {prev}");
            prev = worst;
        }
        assert!(prev < 1.0);
        assert!(m.second_derivative(-1.2).abs() < 1e-12);
        assert!(m.second_derivative(-0.8).abs() < 1e-12);
    }
}
