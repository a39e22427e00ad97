mod common;

use common::*;
use proptest::prelude::*;
use retinex_pso::image_io::to_grayscale;
use retinex_pso::objective::{self, count_edgels, entropy, fitness, sobel_magnitude, EdgeThreshold};
use retinex_pso::we_metric::{approximate_we, detailed_we, dwt2_haar, idwt2_haar, we_report};
use retinex_pso::{GrayImage, RgbImage};

#[test]
fn sobel_matches_stencil_oracle() {
    let mut r = rng(21);
    let plane = random_plane(&mut r, 4, 4);
    let gray = GrayImage::from_plane(plane.clone());
    let got = sobel_magnitude(&gray);
    let want = sobel_stencil(plane.data(), 4, 4);
    assert!(max_abs_diff(got.data(), &want) < 1e-10);
}

#[test]
fn checkerboard_fitness_is_composition_of_parts() {
    let img = RgbImage::from_fn(8, 8, |x, y| {
        if (x / 2 + y / 2) % 2 == 0 {
            [30.0, 40.0, 50.0]
        } else {
            [200.0, 180.0, 160.0]
        }
    })
    .unwrap();
    let report = fitness(&img, EdgeThreshold::MeanMagnitude);

    let gray: Vec<f64> = (0..64)
        .map(|k| {
            let [r, g, b] = img.pixel(k % 8, k / 8);
            0.299 * r + 0.587 * g + 0.114 * b
        })
        .collect();
    let sobel = sobel_stencil(&gray, 8, 8);
    let edge_sum: f64 = sobel.iter().sum();
    let mean = edge_sum / 64.0;
    let edgels = sobel.iter().filter(|&&v| v > mean).count();
    let h = entropy_bits(&gray);
    let expected = edge_sum.ln().ln() * (edgels as f64 / 64.0) * h;

    assert_eq!(report.edgel_count, edgels);
    assert_eq!(report.pixel_count, 64);
    assert!((report.entropy_bits - 1.0).abs() < 1e-12);
    assert!((report.edge_intensity_sum - edge_sum).abs() < 1e-9 * edge_sum);
    assert!((report.fitness - expected).abs() < 1e-12 * expected.max(1.0));
}

#[test]
fn haar_matches_block_oracle() {
    let mut r = rng(22);
    let plane = random_plane(&mut r, 4, 4);
    let bands = dwt2_haar(&GrayImage::from_plane(plane.clone()));
    let blocks = haar_blocks(plane.data(), 4, 4);
    for (k, want) in blocks.iter().enumerate() {
        let got = [bands.ll.data()[k], bands.lh.data()[k], bands.hl.data()[k], bands.hh.data()[k]];
        assert!(max_abs_diff(&got, want) < 1e-12);
    }
}

#[test]
fn dark_image_against_tuned_msrmcr_has_positive_ratios() {
    use retinex_pso::pso::{self, ParamBounds, SwarmConfig, TuneOptions};
    use retinex_pso::retinex::{enhance, ScaleWeights, Variant};
    use retinex_pso::synthetic::{low_light, Scene};

    let img = low_light(Scene::Office, 32);
    let cfg = SwarmConfig {
        particle_count: 10,
        max_iterations: 5,
        ..SwarmConfig::for_variant(Variant::Msrmcr).with_seed(1)
    };
    let tuned = pso::tune(
        &img,
        Variant::Msrmcr,
        &ParamBounds::for_variant(Variant::Msrmcr),
        &cfg,
        &TuneOptions::default(),
    )
    .unwrap();
    let enhanced = enhance(&img, &tuned.best_params, &ScaleWeights::default()).unwrap();
    let r = we_report(&img, &enhanced).unwrap();
    for v in [r.awe_ratio, r.dwe_ratio] {
        assert!(v.is_finite() && v > 0.0, "{r:?}");
    }
}

fn arb_gray(max: usize) -> impl Strategy<Value = GrayImage> {
    (1usize..=max, 1usize..=max, any::<u64>()).prop_map(|(w, h, seed)| {
        let mut r = rng(seed);
        GrayImage::from_plane(random_plane(&mut r, w, h))
    })
}

fn arb_rgb(max: usize) -> impl Strategy<Value = RgbImage> {
    (1usize..=max, 1usize..=max, any::<u64>(), 0.0f64..=1.0).prop_map(|(w, h, seed, contrast)| {
        let mut r = rng(seed);
        random_image(&mut r, w, h).map(|v| v * contrast)
    })
}

proptest! {
    #[test]
    fn fitness_non_negative_and_finite(img in arb_rgb(24)) {
        let r = fitness(&img, EdgeThreshold::MeanMagnitude);
        prop_assert!(r.fitness.is_finite() && r.fitness >= 0.0);
        prop_assert!(r.edgel_count <= r.pixel_count);
        prop_assert!((0.0..=8.0).contains(&r.entropy_bits));
    }

    #[test]
    fn fitness_invariant_under_horizontal_mirror(img in arb_rgb(16)) {
        let (w, h) = (img.width(), img.height());
        let mirrored = RgbImage::from_fn(w, h, |x, y| img.pixel(w - 1 - x, y)).unwrap();
        let a = fitness(&img, EdgeThreshold::Absolute(100.0));
        let b = fitness(&mirrored, EdgeThreshold::Absolute(100.0));
        prop_assert_eq!(a.edgel_count, b.edgel_count);
        prop_assert_eq!(a.entropy_bits, b.entropy_bits);
        prop_assert!((a.fitness - b.fitness).abs() <= 1e-12 * a.fitness.max(1.0));
    }

    #[test]
    fn edgel_count_monotone_in_threshold(img in arb_gray(16), t1 in 0.0f64..2000.0, t2 in 0.0f64..2000.0) {
        let s = sobel_magnitude(&img);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(count_edgels(&s, hi) <= count_edgels(&s, lo));
    }

    #[test]
    fn entropy_matches_oracle_and_bound(img in arb_gray(20)) {
        let e = entropy(&img);
        prop_assert!((e - entropy_bits(img.data())).abs() < 1e-12);
        prop_assert!(e <= 8.0);
    }

    #[test]
    fn sobel_matches_stencil(img in arb_gray(12)) {
        let got = sobel_magnitude(&img);
        let want = sobel_stencil(img.data(), img.width(), img.height());
        prop_assert!(max_abs_diff(got.data(), &want) < 1e-9);
    }

    #[test]
    fn wavelet_energy_conservation(img in arb_gray(24)) {
        let bands = dwt2_haar(&img);
        let padded = idwt2_haar(&bands);
        let mean_sq = padded.data().iter().map(|v| v * v).sum::<f64>() / padded.data().len() as f64;
        let total = approximate_we(&img) + detailed_we(&img);
        prop_assert!((total - mean_sq).abs() <= 1e-9 * mean_sq.max(1e-300));
    }

    #[test]
    fn haar_inverse_reproduces_input(img in arb_gray(24)) {
        let back = idwt2_haar(&dwt2_haar(&img));
        for y in 0..back.height() {
            for x in 0..back.width() {
                let want = img.get(x.min(img.width() - 1), y.min(img.height() - 1));
                prop_assert!((back.get(x, y) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_enhancement_ratios_are_one(img in arb_rgb(16)) {
        let r = we_report(&img, &img).unwrap();
        prop_assert_eq!(r.awe_ratio, 1.0);
        prop_assert_eq!(r.dwe_ratio, 1.0);
        prop_assert!(r.awe_original >= 0.0 && r.dwe_original >= 0.0);
    }
}

#[test]
fn gray_fitness_agrees_with_color_path() {
    let mut r = rng(23);
    let img = random_image(&mut r, 9, 7);
    let a = fitness(&img, EdgeThreshold::MeanMagnitude);
    let b = objective::fitness_gray(&to_grayscale(&img), EdgeThreshold::MeanMagnitude);
    assert_eq!(a, b);
}
