use rand::Rng;

use crate::fitness::{Fitness, Individual};
use crate::rng::Substreams;
use std::cmp::Ordering;

/// A bit is 1 iff its uniform draw falls below the frequency.
#[inline]
pub fn sample_bit(u: f64, tau: f64) -> bool {
    u < tau
}

/// Samples offspring `slot` (0 or 1) from per-position frequencies.
pub fn sample_offspring(
    streams: &mut Substreams,
    slot: usize,
    n: usize,
    mut tau: impl FnMut(usize) -> f64,
) -> Individual {
    let mut x = Individual::zeros(n);
    for i in 0..n {
        if sample_bit(streams.uniform(slot, i), tau(i)) {
            x.set(i, true);
        }
    }
    x
}

/// Returns `(winner, loser)`; ties are broken by a fair coin from `rng`, which
/// is only consulted on ties.
pub fn select_winner<F: Fitness, R: Rng>(
    x: Individual,
    y: Individual,
    f: &F,
    rng: &mut R,
) -> (Individual, Individual) {
    match f.cmp_fitness(&x, &y) {
        Ordering::Greater => (x, y),
        Ordering::Less => (y, x),
        Ordering::Equal => {
            if rng.random::<bool>() {
                (x, y)
            } else {
                (y, x)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::{FitnessFunction, FitnessKind};
    use rand::SeedableRng;
    use rand_pcg::Pcg64Mcg;

    #[test]
    fn sampling_rule() {
        assert!(sample_bit(0.3, 0.5));
        assert!(!sample_bit(0.7, 0.5));
        assert!(sample_bit(0.0049, 1.0 / 100.0));
        assert!(!sample_bit(0.0, 0.0));
        assert!(sample_bit(0.999_999, 1.0));
    }

    #[test]
    fn strict_winner() {
        let f = FitnessFunction::new(FitnessKind::OneMax, 3).unwrap();
        let mut rng = Pcg64Mcg::seed_from_u64(0);
        let (w, l) = select_winner("100".parse().unwrap(), "110".parse().unwrap(), &f, &mut rng);
        assert_eq!(w.to_string(), "110");
        assert_eq!(l.to_string(), "100");
    }

    #[test]
    fn ties_are_fair() {
        let f = FitnessFunction::new(FitnessKind::OneMax, 3).unwrap();
        let mut rng = Pcg64Mcg::seed_from_u64(1);
        let trials = 20_000;
        let mut first = 0;
        for _ in 0..trials {
            let (w, _) =
                select_winner("100".parse().unwrap(), "010".parse().unwrap(), &f, &mut rng);
            if w.to_string() == "100" {
                first += 1;
            }
        }
        // 5 standard deviations of Bin(20000, 1/2)
        assert!((first as f64 - 10_000.0).abs() < 5.0 * 70.72, "{first}");
    }

    #[test]
    fn identical_individuals() {
        let f = FitnessFunction::new(FitnessKind::BinVal, 4).unwrap();
        let mut rng = Pcg64Mcg::seed_from_u64(2);
        let x: Individual = "1011".parse().unwrap();
        let (w, l) = select_winner(x.clone(), x.clone(), &f, &mut rng);
        assert_eq!(w, l);
        assert_eq!(w, x);
    }

    #[test]
    fn sampled_frequencies_match() {
        let mut s = Substreams::new(5, 3);
        let taus = [0.1, 0.5, 0.9];
        let mut ones = [0u32; 3];
        for _ in 0..20_000 {
            let x = sample_offspring(&mut s, 0, 3, |i| taus[i]);
            for (i, c) in ones.iter_mut().enumerate() {
                *c += x.get(i) as u32;
            }
        }
        for i in 0..3 {
            let p = ones[i] as f64 / 20_000.0;
            assert!((p - taus[i]).abs() < 0.015, "{i}: {p}");
        }
    }
}
