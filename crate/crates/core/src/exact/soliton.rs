use crate::ad::Series2;

use super::params::{Jet, SolitonParams};

/// `Q(s) = c / (μ + √(μ² + c/2) cosh(√c s))` with `s = x − ct`; `dt = −c Q'`.
pub fn gardner_soliton(p: &SolitonParams, s: f64) -> Jet {
    let rc = p.c.sqrt();
    let k = (p.mu * p.mu + 0.5 * p.c).sqrt();
    let (ch, sh) = ((rc * s).cosh(), (rc * s).sinh());
    let mut den = Series2::<f64>::zero(4);
    let mut pow = 1.0;
    for i in 0..=4 {
        if i > 0 {
            pow *= rc / i as f64;
        }
        let hyp = if i % 2 == 0 { ch } else { sh };
        den.set(i, 0, k * pow * hyp, 0.0);
    }
    den.add_real(0, 0, p.mu);
    let q = den.recip();
    let d = |n: usize| p.c * q.partial(n, 0).0;
    Jet { value: d(0), dx: [d(1), d(2), d(3), d(4)], dt: -p.c * d(1) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_value() {
        let p = SolitonParams::new(1.0, 0.0).unwrap();
        assert!((gardner_soliton(&p, 0.0).value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decays() {
        let p = SolitonParams::new(1.0, 0.5).unwrap();
        assert!(gardner_soliton(&p, 40.0).value.abs() < 1e-8);
        assert!(gardner_soliton(&p, -40.0).value.abs() < 1e-8);
    }
}
