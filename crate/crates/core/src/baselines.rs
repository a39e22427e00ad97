//! Histogram-equalization baseline.

use crate::image_io::{quantize_u8, Plane, RgbImage};
use crate::objective::histogram_u8;

/// Level mapping `v -> round(255 * cdf(v))` for one channel.
pub fn equalization_lut(plane: &Plane) -> [u8; 256] {
    let hist = histogram_u8(plane);
    let total = plane.len() as f64;
    let mut lut = [0u8; 256];
    let mut cumulative = 0usize;
    for (level, &count) in hist.iter().enumerate() {
        cumulative += count;
        lut[level] = quantize_u8(255.0 * cumulative as f64 / total);
    }
    lut
}

/// Equalizes each channel independently on its 8-bit quantization.
pub fn histogram_equalize(img: &RgbImage) -> RgbImage {
    let equalize = |plane: &Plane| {
        let lut = equalization_lut(plane);
        plane.map(|v| f64::from(lut[quantize_u8(v) as usize]))
    };
    RgbImage::from_planes_unchecked([equalize(img.r()), equalize(img.g()), equalize(img.b())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_goes_white() {
        let img = RgbImage::filled(5, 3, [17.0, 0.0, 255.0]).unwrap();
        let out = histogram_equalize(&img);
        assert!(out.planes().iter().all(|p| p.data().iter().all(|&v| v == 255.0)));
    }

    #[test]
    fn two_level_quarter_split() {
        let img = RgbImage::from_fn(4, 4, |x, _| [if x == 0 { 10.0 } else { 200.0 }; 3]).unwrap();
        let out = histogram_equalize(&img);
        assert_eq!(out.pixel(0, 0), [64.0; 3]);
        assert_eq!(out.pixel(3, 0), [255.0; 3]);
    }

    #[test]
    fn uniform_histogram_stays_nearly_uniform() {
        let img = RgbImage::from_fn(16, 16, |x, y| [(y * 16 + x) as f64; 3]).unwrap();
        let out = histogram_equalize(&img);
        let hist = histogram_u8(out.r());
        // cdf(v) = (v + 1) / 256, so exactly one merge (127 and 128 -> 128)
        // and level 0 becomes empty.
        assert_eq!(hist[0], 0);
        assert_eq!(hist[128], 2);
        assert_eq!(hist.iter().filter(|&&n| n == 1).count(), 254);
        let lut = equalization_lut(img.r());
        assert!(lut.windows(2).all(|w| w[0] <= w[1]));
    }

    fn arb_image() -> impl Strategy<Value = RgbImage> {
        (1usize..12, 1usize..12, any::<u64>()).prop_map(|(w, h, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let levels = rng.random_range(1..12u32);
            RgbImage::from_fn(w, h, |_, _| {
                std::array::from_fn(|_| (rng.random_range(0..levels) * 23) as f64)
            })
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn mapping_monotone_and_integral(img in arb_image()) {
            let out = histogram_equalize(&img);
            for (src, dst) in img.planes().iter().zip(out.planes()) {
                let lut = equalization_lut(src);
                prop_assert!(lut.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(dst.data().iter().all(|&v| v.fract() == 0.0 && (0.0..=255.0).contains(&v)));
            }
        }

        #[test]
        fn equalizing_twice_moves_no_pixel_more_than_one_level(img in arb_image()) {
            let once = histogram_equalize(&img);
            let twice = histogram_equalize(&once);
            for (a, b) in once.planes().iter().zip(twice.planes()) {
                for (x, y) in a.data().iter().zip(b.data()) {
                    prop_assert!((x - y).abs() <= 1.0);
                }
            }
        }
    }
}
