//! Deterministic low-light test scenes.
//!
//! These stand in for under-exposed photographs: most of the frame sits in
//! the bottom quarter of the intensity range, with a few brighter regions
//! and some texture so edges and entropy are non-trivial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image_io::RgbImage;

/// The bundled scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scene {
    /// Dark room with a bright window and a few furniture blocks.
    Office,
    /// Dim foliage-like texture under a vignette.
    Foliage,
    /// Colored objects under a single weak, off-center light.
    Spotlight,
}

impl Scene {
    pub const ALL: [Scene; 3] = [Scene::Office, Scene::Foliage, Scene::Spotlight];

    pub fn name(self) -> &'static str {
        match self {
            Scene::Office => "office",
            Scene::Foliage => "foliage",
            Scene::Spotlight => "spotlight",
        }
    }
}

/// Renders `scene` at `size x size`.
pub fn low_light(scene: Scene, size: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(scene as u64 + 0x5eed);
    let s = size.max(1) as f64;
    let noise: Vec<f64> = (0..size * size * 3).map(|_| rng.random::<f64>() - 0.5).collect();
    RgbImage::from_fn(size, size, |x, y| {
        let (u, v) = ((x as f64 + 0.5) / s, (y as f64 + 0.5) / s);
        let n = |c: usize| noise[(y * size + x) * 3 + c];
        let rgb = match scene {
            Scene::Office => {
                let window = (0.6..0.9).contains(&u) && (0.1..0.45).contains(&v);
                let desk = (0.1..0.55).contains(&u) && (0.6..0.8).contains(&v);
                let shelf = (0.05..0.2).contains(&u) && (0.1..0.55).contains(&v);
                if window {
                    [190.0, 200.0, 215.0]
                } else if desk {
                    [38.0, 24.0, 14.0]
                } else if shelf {
                    [20.0, 26.0, 34.0]
                } else {
                    let wall = 14.0 + 10.0 * u;
                    [wall, wall * 0.95, wall * 0.85]
                }
            }
            Scene::Foliage => {
                let leaf = ((u * 23.0).sin() * (v * 17.0).cos() + (u * v * 40.0).sin()) * 0.5;
                let vignette = 1.0 - 0.7 * ((u - 0.5).powi(2) + (v - 0.5).powi(2)).sqrt();
                let base = (22.0 + 16.0 * leaf) * vignette;
                [base * 0.7, base * 1.2, base * 0.5]
            }
            Scene::Spotlight => {
                let light = 1.0 / (1.0 + 12.0 * ((u - 0.3).powi(2) + (v - 0.35).powi(2)));
                let ball = (u - 0.65).powi(2) + (v - 0.6).powi(2) < 0.03;
                let block = (0.15..0.4).contains(&u) && (0.55..0.85).contains(&v);
                let albedo = if ball {
                    [0.9, 0.25, 0.2]
                } else if block {
                    [0.2, 0.35, 0.9]
                } else {
                    [0.5, 0.5, 0.45]
                };
                albedo.map(|a| 8.0 + 70.0 * a * light)
            }
        };
        [0, 1, 2].map(|c| (rgb[c] + 6.0 * n(c)).clamp(0.0, 255.0).round())
    })
    .expect("synthetic scene dimensions are positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenes_are_dark_and_deterministic() {
        for scene in Scene::ALL {
            let a = low_light(scene, 32);
            assert_eq!(a, low_light(scene, 32));
            let mean: f64 = a.planes().iter().map(|p| p.mean()).sum::<f64>() / 3.0;
            assert!(mean < 64.0, "{} mean {mean}", scene.name());
            assert!(a.planes().iter().all(|p| p.min() >= 0.0 && p.max() <= 255.0));
        }
    }
}
