use rand::Rng;
use serde::{Deserialize, Serialize};

use super::memory::MemoryView;
use super::params::WalkParams;
use crate::{Error, Result};

/// Law of the next step given the memory: `P(+1)`, `P(0)`, `P(-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLaw {
    pub plus: f64,
    pub zero: f64,
    pub minus: f64,
}

impl StepLaw {
    pub fn mean(&self) -> f64 {
        self.plus - self.minus
    }

    pub fn total(&self) -> f64 {
        self.plus + self.zero + self.minus
    }

    /// Maps a uniform `u ∈ [0, 1)` to a step. A zero step is only produced
    /// when `zero > 0`, so non-delayed walks keep their parity exactly.
    #[inline]
    pub fn sample(&self, u: f64) -> i8 {
        if u < self.plus {
            1
        } else if self.zero > 0.0 && u < self.plus + self.zero {
            0
        } else {
            -1
        }
    }

    /// `(value, probability)` pairs with positive probability, in the order `+1, 0, -1`.
    pub fn outcomes(&self) -> impl Iterator<Item = (i8, f64)> {
        [(1i8, self.plus), (0, self.zero), (-1, self.minus)]
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
    }
}

/// Conditional law of `X_{n+1}` given the remembered steps.
///
/// With `m = size`, `n+`/`n-` the remembered `±1` counts and `z` the
/// remembered zeros, a uniformly chosen remembered step is repeated (`p`),
/// flipped (`q`) or replaced by a stay (`r`):
///
/// ```text
/// P(+1) = (p n+ + q n-) / m
/// P(-1) = (q n+ + p n-) / m
/// P(0)  = r + (p + q) z / m
/// ```
#[inline]
pub fn step_distribution(params: &WalkParams, view: &MemoryView) -> Result<StepLaw> {
    if view.size == 0 {
        return Err(Error::Contract("step law requested with an empty memory".into()));
    }
    Ok(step_law_unchecked(params, view))
}

#[inline]
pub(crate) fn step_law_unchecked(params: &WalkParams, view: &MemoryView) -> StepLaw {
    let m = view.size as f64;
    let np = view.plus() as f64;
    let nm = view.minus() as f64;
    let z = view.zeros() as f64;
    let (p, q, r) = (params.p(), params.q(), params.r());
    StepLaw {
        plus: (p * np + q * nm) / m,
        zero: if r == 0.0 && view.zeros() == 0 { 0.0 } else { r + (p + q) * z / m },
        minus: (q * np + p * nm) / m,
    }
}

/// Probability of `+1` for a non-delayed walk, written as `(1 + (2p-1) sum/size) / 2`.
///
/// Algebraically equal to `step_distribution(..).plus` when `r = 0`; kept as
/// a separate route for cross-checking the ternary engine.
pub fn binary_plus_probability(p: f64, view: &MemoryView) -> f64 {
    0.5 * (1.0 + (2.0 * p - 1.0) * view.sum as f64 / view.size as f64)
}

/// Law of the first step: `(+1, -1)` w.p. `(s, 1-s)` when `r = 0`, and
/// `(+1, 0, -1)` w.p. `(p, r, q)` for delayed walks.
pub fn first_step_law(params: &WalkParams) -> StepLaw {
    if params.is_delayed() {
        StepLaw { plus: params.p(), zero: params.r(), minus: params.q() }
    } else {
        StepLaw { plus: params.s(), zero: 0.0, minus: 1.0 - params.s() }
    }
}

pub fn draw_first_step<R: Rng + ?Sized>(params: &WalkParams, rng: &mut R) -> i8 {
    first_step_law(params).sample(rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Enumerates the choice of the remembered index K (uniform over the
    // memory) and the repeat/flip/stay coin.
    fn brute_force_law(params: &WalkParams, remembered: &[i8]) -> (f64, f64, f64) {
        let m = remembered.len() as f64;
        let (mut plus, mut zero, mut minus) = (0.0, 0.0, 0.0);
        for &x in remembered {
            for (coin, w) in [(1i8, params.p()), (-1, params.q())] {
                match coin * x {
                    1 => plus += w / m,
                    -1 => minus += w / m,
                    _ => zero += w / m,
                }
            }
            zero += params.r() / m;
        }
        (plus, zero, minus)
    }

    fn view_of(steps: &[i8]) -> MemoryView {
        MemoryView {
            size: steps.len() as u64,
            sum: steps.iter().map(|&x| x as i64).sum(),
            nonzero: steps.iter().filter(|&&x| x != 0).count() as u64,
        }
    }

    #[test]
    fn classic_example() {
        let w = WalkParams::new(0.7).unwrap();
        let mem = [1, 1, 1, -1];
        let law = step_distribution(&w, &view_of(&mem)).unwrap();
        let (bp, bz, bm) = brute_force_law(&w, &mem);
        assert!((law.plus - 0.6).abs() < 1e-15 && (bp - 0.6).abs() < 1e-15);
        assert_eq!(law.zero, 0.0);
        assert!(bz.abs() < 1e-15);
        assert!((law.minus - 0.4).abs() < 1e-15 && (bm - 0.4).abs() < 1e-15);
    }

    #[test]
    fn symmetric_walk_is_a_coin() {
        let w = WalkParams::new(0.5).unwrap();
        for mem in [&[1i8, 1, 1][..], &[-1, 1], &[-1, -1, -1, -1, 1]] {
            let law = step_distribution(&w, &view_of(mem)).unwrap();
            assert!((law.plus - 0.5).abs() < 1e-15);
            assert!((law.minus - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn delayed_example() {
        let w = WalkParams::delayed(0.5, 0.2, 0.3).unwrap();
        let mem = [1, 0, -1];
        let law = step_distribution(&w, &view_of(&mem)).unwrap();
        let (bp, bz, bm) = brute_force_law(&w, &mem);
        assert!((law.plus - 7.0 / 30.0).abs() < 1e-15 && (bp - 7.0 / 30.0).abs() < 1e-15);
        assert!((law.zero - 16.0 / 30.0).abs() < 1e-15 && (bz - 16.0 / 30.0).abs() < 1e-15);
        assert!((law.minus - 7.0 / 30.0).abs() < 1e-15 && (bm - 7.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn empty_memory_is_rejected() {
        let w = WalkParams::new(0.6).unwrap();
        let err = step_distribution(&w, &MemoryView { size: 0, sum: 0, nonzero: 0 });
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn all_zero_memory_absorbs() {
        let w = WalkParams::delayed(0.6, 0.1, 0.3).unwrap();
        let law = step_distribution(&w, &view_of(&[0, 0, 0])).unwrap();
        assert_eq!((law.plus, law.minus), (0.0, 0.0));
        assert!((law.zero - 1.0).abs() < 1e-15);
        for u in [0.0, 0.5, 0.999_999_999] {
            assert_eq!(law.sample(u), 0);
        }
    }

    #[test]
    fn certain_first_step() {
        let w = WalkParams::new(0.7).unwrap().with_first_step(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| draw_first_step(&w, &mut rng) == 1));
    }

    #[test]
    fn first_step_frequency() {
        // Binomial(10^6, 0.7): 3 sigma = 3*sqrt(0.21/10^6) ~ 0.0014.
        let w = WalkParams::new(0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 1_000_000;
        let plus = (0..draws).filter(|_| draw_first_step(&w, &mut rng) == 1).count();
        let freq = plus as f64 / draws as f64;
        assert!((freq - 0.7).abs() < 0.0014, "freq={freq}");
    }

    #[test]
    fn delayed_first_step_law() {
        let law = first_step_law(&WalkParams::delayed(0.5, 0.2, 0.3).unwrap());
        assert_eq!((law.plus, law.zero, law.minus), (0.5, 0.3, 0.2));
    }

    proptest::proptest! {
        #[test]
        fn law_is_a_distribution_with_the_right_mean(
            p in 0.01f64..0.99,
            split in 0.0f64..1.0,
            plus in 0u64..40,
            minus in 0u64..40,
            zeros in 0u64..40,
        ) {
            proptest::prop_assume!(plus + minus + zeros > 0);
            let q = (1.0 - p) * split;
            let r = 1.0 - p - q;
            let w = WalkParams::delayed(p, q, r).unwrap();
            let view = MemoryView { size: plus + minus + zeros, sum: plus as i64 - minus as i64, nonzero: plus + minus };
            let law = step_distribution(&w, &view).unwrap();
            for x in [law.plus, law.zero, law.minus] {
                proptest::prop_assert!((-1e-15..=1.0 + 1e-15).contains(&x));
            }
            proptest::prop_assert!((law.total() - 1.0).abs() < 1e-14);
            let target = (p - q) * view.sum as f64 / view.size as f64;
            proptest::prop_assert!((law.mean() - target).abs() < 1e-14);
        }

        #[test]
        fn binary_route_agrees(p in 0.01f64..0.99, plus in 0u64..50, minus in 0u64..50) {
            proptest::prop_assume!(plus + minus > 0);
            let w = WalkParams::new(p).unwrap();
            let view = MemoryView { size: plus + minus, sum: plus as i64 - minus as i64, nonzero: plus + minus };
            let law = step_distribution(&w, &view).unwrap();
            proptest::prop_assert!((law.plus - binary_plus_probability(p, &view)).abs() < 1e-14);
            proptest::prop_assert_eq!(law.zero, 0.0);
        }
    }
}
