use ibp::dunkl::{chamber_b_representative, weyl_b_elements, ModelParams};
use ibp::stats::{exact_density_beta2, find_peaks, steady_density_beta, Histogram, HistogramMode};
use proptest::prelude::*;

#[test]
fn exact_density_is_nonnegative() {
    for &n in &[1, 3, 7] {
        for &nu in &[0.5, 2.0] {
            for k in 0..10_000 {
                let y = 1e-3 * (k as f64 + 0.5);
                let d = exact_density_beta2(y, 1.0, n, nu).unwrap();
                assert!(d >= 0.0 && d.is_finite(), "N={n} ν={nu} y={y}: {d}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steady_density_is_weyl_symmetric(
        gaps in proptest::collection::vec(0.05f64..1.0, 3),
        pick in 0usize..48,
        beta in 0.5f64..20.0,
        nu in 0.0f64..3.0,
    ) {
        let mut acc = 0.0;
        let u: Vec<f64> = gaps.iter().map(|g| { acc += g; acc }).collect();
        let p = ModelParams::new(beta, nu, 3).unwrap();
        let moved = weyl_b_elements(3)[pick].apply(&u);
        let a = steady_density_beta(&u, &p).unwrap();
        let b = steady_density_beta(&chamber_b_representative(&moved), &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
    }

    #[test]
    fn peaks_ignore_count_scaling(
        counts in proptest::collection::vec(0u64..1000, 5..60),
        factor in 2u64..50,
        threshold in 0.01f64..0.5,
    ) {
        let total: u64 = counts.iter().sum::<u64>().max(1);
        let h = Histogram::from_counts(-3, 0.1, counts.clone(), total, 1, HistogramMode::Pooled).unwrap();
        let scaled: Vec<u64> = counts.iter().map(|c| c * factor).collect();
        let g = Histogram::from_counts(-3, 0.1, scaled, total * factor, 1, HistogramMode::Pooled).unwrap();
        prop_assert_eq!(find_peaks(&h, threshold), find_peaks(&g, threshold));
    }

    #[test]
    fn histogram_keeps_every_sample(
        samples in proptest::collection::vec(-5.0f64..5.0, 3..300),
        width in 0.01f64..1.0,
        scale in 0.1f64..4.0,
    ) {
        let n = samples.len() - samples.len() % 3;
        let h = Histogram::pooled(&samples[..n], 3, width, scale).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), n as u64);
        let mass: f64 = h.densities().iter().sum::<f64>() * width;
        prop_assert!((mass - 1.0).abs() < 1e-12);
        // every center sits on the lattice of half-odd multiples of the width
        for c in h.centers() {
            let k = c / width - 0.5;
            prop_assert!((k - k.round()).abs() < 1e-6);
        }
    }
}
