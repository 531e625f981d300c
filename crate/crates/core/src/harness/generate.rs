//! Synthetic figure-ground problems.
//!
//! Image model: `regions` sites drawn uniformly over the image, each with a
//! uniform intensity in `0..=255`. A pixel takes the intensity of its
//! nearest site (squared Euclidean distance, ties to the lower site index)
//! plus uniform integer noise in `-noise..=noise`, clamped to `0..=255`.
//! Random draws happen in that order: `(x, y, intensity)` per site, then
//! one noise value per pixel in row-major order.
//!
//! Seeds: a near-square `cols x rows` grid with the fewest columns such
//! that `cols² · height ≥ seeds · width`; grid point `(i, j)` sits at
//! `((2i+1)·W / 2cols, (2j+1)·H / 2rows)` and the first `seeds` points in
//! row-major order are used. Each seed yields one problem whose background
//! seeds are the image border minus the foreground seed.
//!
//! Weights, with `d = |I(v) − I(seed)|` and `s = weight_scale`:
//!
//! * `unary_base = 0`, `unary_slope = 1`, so the source capacity is lambda;
//! * `sink_base = round(s · unary_weight · d / 255)`;
//! * `pairwise = round(s · smoothness · σ² / (σ² + ΔI²))` towards each
//!   in-grid neighbour, `σ = contrast_sigma`.
//!
//! Rounding is half-up. The truth mask of a problem is the region
//! containing its seed, before noise.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{round_half_up, BenchConfig};
use crate::graph::Dir;
use crate::parametric::SeedProblem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("{seeds} seeds need a {cols}x{rows} grid, denser than the {width}x{height} image")]
    SeedGridTooDense {
        seeds: usize,
        cols: usize,
        rows: usize,
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticImage {
    pub width: usize,
    pub height: usize,
    pub intensity: Vec<u8>,
    /// Nearest site per pixel.
    pub region: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticProblem {
    pub image: usize,
    /// Foreground seed pixel.
    pub seed: usize,
    pub problem: SeedProblem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSet {
    pub images: Vec<SyntheticImage>,
    /// Grouped by image, then in seed-grid order.
    pub problems: Vec<SyntheticProblem>,
}

impl SyntheticSet {
    pub fn truth(&self, index: usize) -> Vec<bool> {
        let p = &self.problems[index];
        let img = &self.images[p.image];
        let r = img.region[p.seed];
        img.region.iter().map(|&q| q == r).collect()
    }

    pub fn seed_problems(&self) -> Vec<SeedProblem> {
        self.problems.iter().map(|p| p.problem.clone()).collect()
    }
}

/// Seed coordinates for `seeds` seeds on a `width x height` image.
pub fn seed_grid(seeds: usize, width: usize, height: usize) -> Result<Vec<(usize, usize)>, GenError> {
    let mut cols = 1;
    while cols * cols * height < seeds * width {
        cols += 1;
    }
    let rows = seeds.div_ceil(cols);
    if cols > width || rows > height {
        return Err(GenError::SeedGridTooDense {
            seeds,
            cols,
            rows,
            width,
            height,
        });
    }
    Ok((0..rows)
        .flat_map(|j| (0..cols).map(move |i| ((2 * i + 1) * width / (2 * cols), (2 * j + 1) * height / (2 * rows))))
        .take(seeds)
        .collect())
}

pub fn generate_image<R: Rng>(cfg: &BenchConfig, rng: &mut R) -> SyntheticImage {
    let (w, h) = (cfg.width, cfg.height);
    let sites: Vec<(i64, i64, u8)> = (0..cfg.regions)
        .map(|_| {
            let x = rng.gen_range(0..w) as i64;
            let y = rng.gen_range(0..h) as i64;
            (x, y, rng.gen::<u8>())
        })
        .collect();
    let mut intensity = Vec::with_capacity(w * h);
    let mut region = Vec::with_capacity(w * h);
    let noise = cfg.noise as i32;
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (r, &(_, _, base)) = sites
                .iter()
                .enumerate()
                .min_by_key(|(i, &(sx, sy, _))| ((sx - x).pow(2) + (sy - y).pow(2), *i))
                .expect("at least one region");
            let n = rng.gen_range(-noise..=noise);
            intensity.push((base as i32 + n).clamp(0, 255) as u8);
            region.push(r as u16);
        }
    }
    SyntheticImage {
        width: w,
        height: h,
        intensity,
        region,
    }
}

pub fn build_problem(cfg: &BenchConfig, img: &SyntheticImage, seed: usize) -> SeedProblem {
    let (w, h) = (img.width, img.height);
    let mut p = SeedProblem::zeros(w, h);
    let scale = cfg.weight_scale as f64;
    let sigma2 = cfg.contrast_sigma * cfg.contrast_sigma;
    let at = |v: usize| img.intensity[v] as f64;
    let grid = crate::graph::GridGraph::zeros(w, h);
    for v in 0..w * h {
        let d = (at(v) - at(seed)).abs();
        p.unary_slope[v] = 1;
        p.sink_base[v] = round_half_up(scale * cfg.unary_weight * d / 255.0);
        for dir in Dir::ALL {
            if let Some(u) = grid.neighbor(v, dir) {
                let di = at(v) - at(u);
                let weight = if sigma2 == 0.0 && di == 0.0 {
                    cfg.smoothness
                } else {
                    cfg.smoothness * sigma2 / (sigma2 + di * di)
                };
                p.pairwise[v][dir.index()] = round_half_up(scale * weight);
            }
        }
    }
    p.fg_seeds = BTreeSet::from([seed]);
    p.bg_seeds = (0..w * h)
        .filter(|&v| {
            let (x, y) = (v % w, v / w);
            (x == 0 || y == 0 || x + 1 == w || y + 1 == h) && v != seed
        })
        .collect();
    p
}

pub fn generate<R: Rng>(cfg: &BenchConfig, rng: &mut R) -> Result<SyntheticSet, GenError> {
    let grid = seed_grid(cfg.seeds, cfg.width, cfg.height)?;
    let mut images = Vec::with_capacity(cfg.images);
    let mut problems = Vec::with_capacity(cfg.images * cfg.seeds);
    for image in 0..cfg.images {
        let img = generate_image(cfg, rng);
        for &(x, y) in &grid {
            let seed = y * cfg.width + x;
            problems.push(SyntheticProblem {
                image,
                seed,
                problem: build_problem(cfg, &img, seed),
            });
        }
        images.push(img);
    }
    Ok(SyntheticSet { images, problems })
}

pub fn generate_problems<R: Rng>(cfg: &BenchConfig, rng: &mut R) -> Result<Vec<SeedProblem>, GenError> {
    Ok(generate(cfg, rng)?.seed_problems())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn cfg(seeds: usize, width: usize, height: usize) -> BenchConfig {
        BenchConfig {
            seeds,
            width,
            height,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn one_seed_on_tiny_image() {
        let c = cfg(1, 2, 2);
        let ps = generate_problems(&c, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].fg_seeds, BTreeSet::from([3]));
        assert_eq!(ps[0].bg_seeds, BTreeSet::from([0, 1, 2]));
        ps[0].validate().unwrap();
    }

    #[test]
    fn sixteen_seed_grid() {
        let g = seed_grid(16, 128, 128).unwrap();
        let coords = [16, 48, 80, 112];
        let expected: Vec<(usize, usize)> = coords.iter().flat_map(|&y| coords.iter().map(move |&x| (x, y))).collect();
        assert_eq!(g, expected);
    }

    #[test]
    fn default_seed_count_fits() {
        let g = seed_grid(178, 64, 64).unwrap();
        assert_eq!(g.len(), 178);
        assert_eq!(g.iter().collect::<BTreeSet<_>>().len(), 178);
    }

    #[test]
    fn dense_grid_rejected() {
        assert!(matches!(seed_grid(5, 2, 2), Err(GenError::SeedGridTooDense { .. })));
        assert!(matches!(seed_grid(3, 1, 2), Err(GenError::SeedGridTooDense { .. })));
    }

    #[test]
    fn deterministic_and_well_formed() {
        let c = cfg(4, 16, 12);
        let a = generate(&c, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate(&c, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let other = generate(&c, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_ne!(a, other);
        for (i, p) in a.problems.iter().enumerate() {
            p.problem.validate().unwrap();
            assert!(p.problem.is_well_posed());
            assert!(a.truth(i)[p.seed]);
            for lambda in c.lambdas.values() {
                p.problem.instantiate(*lambda).unwrap();
            }
        }
    }

    #[test]
    fn pairwise_is_symmetric() {
        let c = cfg(1, 8, 8);
        let set = generate(&c, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let p = &set.problems[0].problem;
        let g = crate::graph::GridGraph::zeros(8, 8);
        for v in 0..64 {
            for dir in Dir::ALL {
                match g.neighbor(v, dir) {
                    Some(u) => assert_eq!(p.pairwise[v][dir.index()], p.pairwise[u][dir.opposite().index()]),
                    None => assert_eq!(p.pairwise[v][dir.index()], 0),
                }
            }
        }
    }
}
