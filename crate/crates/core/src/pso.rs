//! Particle swarm optimization over a bounded box, and the retinex
//! parameter tuner built on it.
//!
//! The swarm is synchronous: every particle moves, all new positions are
//! scored, and only then are personal and global bests updated. All
//! randomness comes from one seeded ChaCha stream owned by the swarm, so a
//! run is fully determined by its seed and inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::RgbImage;
use crate::objective::{self, EdgeThreshold};
use crate::retinex::{self, RetinexParams, ScaleWeights, Variant};

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::argument(format!("invalid interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Named search box, one interval per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    names: Vec<String>,
    intervals: Vec<Interval>,
}

impl ParamBounds {
    pub fn new(dims: Vec<(String, Interval)>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::argument("search box needs at least one dimension"));
        }
        for (name, iv) in &dims {
            Interval::new(iv.lower, iv.upper)
                .map_err(|e| Error::argument(format!("bound '{name}': {e}")))?;
        }
        let (names, intervals) = dims.into_iter().unzip();
        Ok(Self { names, intervals })
    }

    /// The same interval in every one of `dims` unnamed dimensions.
    pub fn uniform(dims: usize, lower: f64, upper: f64) -> Result<Self> {
        let iv = Interval::new(lower, upper)?;
        Self::new((0..dims).map(|i| (format!("x{i}"), iv)).collect())
    }

    /// Default search ranges of the given variant.
    pub fn for_variant(variant: Variant) -> Self {
        let sigmas = [(1.0, 80.0), (81.0, 150.0), (151.0, 256.0)];
        let rest: &[(f64, f64)] = match variant {
            // G, alpha, beta, b
            Variant::Msrcr => &[(150.0, 200.0), (100.0, 125.0), (0.0, 50.0), (-50.0, 0.0)],
            // C, G, b
            Variant::Msrmcr => &[(100.0, 125.0), (0.0, 5.0), (-50.0, 0.0)],
        };
        let names = variant.param_names().iter().map(|s| s.to_string());
        let intervals = sigmas
            .iter()
            .chain(rest)
            .map(|&(lower, upper)| Interval { lower, upper });
        Self {
            names: names.collect(),
            intervals: intervals.collect(),
        }
    }

    pub fn dimensions(&self) -> usize {
        self.intervals.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.intervals.len()
            && position.iter().zip(&self.intervals).all(|(&v, iv)| iv.contains(v))
    }

    /// Fixes one dimension to a single value inside its current interval.
    pub fn pin(&mut self, name: &str, value: f64) -> Result<()> {
        let idx = self
            .names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::argument(format!("no bound named '{name}'")))?;
        let iv = self.intervals[idx];
        if !iv.contains(value) {
            return Err(Error::argument(format!(
                "{name} = {value} lies outside its search range [{}, {}]",
                iv.lower, iv.upper
            )));
        }
        self.intervals[idx] = Interval {
            lower: value,
            upper: value,
        };
        Ok(())
    }

    /// Checks that every point of the box decodes to valid `variant`
    /// parameters.
    pub fn check_variant(&self, variant: Variant) -> Result<()> {
        let expected = variant.param_names();
        if self.names.len() != expected.len()
            || !self.names.iter().zip(expected).all(|(a, b)| a.eq_ignore_ascii_case(b))
        {
            return Err(Error::argument(format!(
                "bounds {:?} do not match {} parameters {:?}",
                self.names,
                variant.name(),
                expected
            )));
        }
        let s = &self.intervals;
        if !(s[0].lower > 0.0 && s[0].upper < s[1].lower && s[1].upper < s[2].lower) {
            return Err(Error::argument(
                "sigma ranges must be positive, disjoint and ascending",
            ));
        }
        match variant {
            Variant::Msrmcr if s[3].lower <= 0.0 => {
                Err(Error::argument("range of C must be strictly positive"))
            }
            Variant::Msrcr if s[4].lower < 0.0 => {
                Err(Error::argument("range of alpha must be non-negative"))
            }
            _ => Ok(()),
        }
    }
}

/// Swarm hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub particle_count: usize,
    pub dimensions: usize,
    pub max_iterations: usize,
    pub w_max: f64,
    pub w_min: f64,
    pub c1_range: Interval,
    pub c2_range: Interval,
    pub rng_seed: u64,
}

impl SwarmConfig {
    /// 30 particles, 30 iterations, inertia 2 -> 0, acceleration drawn
    /// from `[0, 2]` each iteration.
    pub fn new(dimensions: usize) -> Self {
        Self {
            particle_count: 30,
            dimensions,
            max_iterations: 30,
            w_max: 2.0,
            w_min: 0.0,
            c1_range: Interval {
                lower: 0.0,
                upper: 2.0,
            },
            c2_range: Interval {
                lower: 0.0,
                upper: 2.0,
            },
            rng_seed: 0,
        }
    }

    pub fn for_variant(variant: Variant) -> Self {
        Self::new(variant.dimensions())
    }

    /// Conventional PSO with constant acceleration coefficients.
    pub fn with_fixed_coefficients(mut self, c1: f64, c2: f64) -> Self {
        self.c1_range = Interval {
            lower: c1,
            upper: c1,
        };
        self.c2_range = Interval {
            lower: c2,
            upper: c2,
        };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 {
            return Err(Error::config("particle count must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("iteration count must be at least 1"));
        }
        if !(self.w_min >= 0.0 && self.w_max >= self.w_min && self.w_max.is_finite()) {
            return Err(Error::config(format!(
                "inertia must satisfy w_max >= w_min >= 0, got {} / {}",
                self.w_max, self.w_min
            )));
        }
        for iv in [self.c1_range, self.c2_range] {
            Interval::new(iv.lower, iv.upper).map_err(|e| Error::config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Linearly decaying inertia weight.
pub fn inertia(iteration: usize, cfg: &SwarmConfig) -> Result<f64> {
    if iteration > cfg.max_iterations {
        return Err(Error::argument(format!(
            "iteration {iteration} exceeds the maximum of {}",
            cfg.max_iterations
        )));
    }
    Ok(cfg.w_max - iteration as f64 * (cfg.w_max - cfg.w_min) / cfg.max_iterations as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    gbest_position: Vec<f64>,
    gbest_fitness: f64,
    iteration: usize,
    evaluations: usize,
    rng: ChaCha8Rng,
}

impl Swarm {
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn gbest_position(&self) -> &[f64] {
        &self.gbest_position
    }

    pub fn gbest_fitness(&self) -> f64 {
        self.gbest_fitness
    }

    /// Number of completed [`step`] calls.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Scores every current position and folds the results into the
    /// personal and global bests.
    pub fn evaluate(&mut self, fitness_of: &mut impl FnMut(&[f64]) -> f64) {
        let scores: Vec<f64> = self.particles.iter().map(|p| fitness_of(&p.position)).collect();
        self.evaluations += scores.len();
        for (p, &f) in self.particles.iter_mut().zip(&scores) {
            if f > p.pbest_fitness {
                p.pbest_fitness = f;
                p.pbest_position.clone_from(&p.position);
            }
        }
        for p in &self.particles {
            if p.pbest_fitness > self.gbest_fitness {
                self.gbest_fitness = p.pbest_fitness;
                self.gbest_position.clone_from(&p.pbest_position);
            }
        }
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, iv: Interval) -> f64 {
    iv.lower + iv.width() * rng.random::<f64>()
}

/// Random positions inside the box, zero velocities. Bests are unset until
/// the first [`Swarm::evaluate`].
pub fn init_swarm(bounds: &ParamBounds, cfg: &SwarmConfig) -> Result<Swarm> {
    cfg.validate()?;
    if bounds.dimensions() != cfg.dimensions {
        return Err(Error::argument(format!(
            "swarm configured for {} dimensions but bounds have {}",
            cfg.dimensions,
            bounds.dimensions()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let particles: Vec<Particle> = (0..cfg.particle_count)
        .map(|_| {
            let position: Vec<f64> = bounds
                .intervals()
                .iter()
                .map(|&iv| uniform_in(&mut rng, iv))
                .collect();
            Particle {
                velocity: vec![0.0; position.len()],
                pbest_position: position.clone(),
                pbest_fitness: f64::NEG_INFINITY,
                position,
            }
        })
        .collect();
    Ok(Swarm {
        gbest_position: particles[0].position.clone(),
        gbest_fitness: f64::NEG_INFINITY,
        particles,
        iteration: 0,
        evaluations: 0,
        rng,
    })
}

/// One synchronous swarm update followed by evaluation of the new positions.
///
/// Velocities are limited to half the interval width per dimension.
/// Positions leaving the box are clamped back and that velocity component
/// is zeroed.
pub fn step(
    swarm: &mut Swarm,
    fitness_of: &mut impl FnMut(&[f64]) -> f64,
    cfg: &SwarmConfig,
    bounds: &ParamBounds,
) -> Result<()> {
    if swarm.iteration >= cfg.max_iterations {
        return Err(Error::argument(format!(
            "swarm already ran {} of {} iterations",
            swarm.iteration, cfg.max_iterations
        )));
    }
    if bounds.dimensions() != cfg.dimensions {
        return Err(Error::argument("bounds do not match swarm dimensions"));
    }
    let w = inertia(swarm.iteration, cfg)?;
    let c1 = uniform_in(&mut swarm.rng, cfg.c1_range);
    let c2 = uniform_in(&mut swarm.rng, cfg.c2_range);
    let gbest = swarm.gbest_position.clone();

    for p in &mut swarm.particles {
        for (d, iv) in bounds.intervals().iter().enumerate() {
            let r1: f64 = swarm.rng.random();
            let r2: f64 = swarm.rng.random();
            let x = p.position[d];
            let v_max = 0.5 * iv.width();
            let v = (w * p.velocity[d]
                + c1 * r1 * (p.pbest_position[d] - x)
                + c2 * r2 * (gbest[d] - x))
                .clamp(-v_max, v_max);
            let moved = x + v;
            if moved < iv.lower || moved > iv.upper {
                p.position[d] = moved.clamp(iv.lower, iv.upper);
                p.velocity[d] = 0.0;
            } else {
                p.position[d] = moved;
                p.velocity[d] = v;
            }
        }
    }
    swarm.evaluate(fitness_of);
    swarm.iteration += 1;
    Ok(())
}

/// Result of a plain optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Global best after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Maximizes `fitness_of` over `bounds`. `observe` sees the swarm after the
/// initial evaluation and after every step.
pub fn maximize(
    bounds: &ParamBounds,
    cfg: &SwarmConfig,
    mut fitness_of: impl FnMut(&[f64]) -> f64,
    mut observe: impl FnMut(&Swarm),
) -> Result<OptimizeResult> {
    let mut swarm = init_swarm(bounds, cfg)?;
    swarm.evaluate(&mut fitness_of);
    observe(&swarm);
    let mut history = Vec::with_capacity(cfg.max_iterations);
    for _ in 0..cfg.max_iterations {
        step(&mut swarm, &mut fitness_of, cfg, bounds)?;
        observe(&swarm);
        history.push(swarm.gbest_fitness);
    }
    Ok(OptimizeResult {
        best_position: swarm.gbest_position,
        best_fitness: swarm.gbest_fitness,
        history,
        evaluations: swarm.evaluations,
    })
}

/// Settings of the image being tuned that are not searched.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TuneOptions {
    pub weights: ScaleWeights,
    pub threshold: EdgeThreshold,
}

/// Outcome of tuning one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_params: RetinexParams,
    pub best_fitness: f64,
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub seed: u64,
    pub bounds: ParamBounds,
}

/// Fitness of `img` enhanced with `params`.
pub fn score(img: &RgbImage, params: &RetinexParams, opts: &TuneOptions) -> Result<f64> {
    let enhanced = retinex::enhance(img, params, &opts.weights)?;
    Ok(objective::fitness(&enhanced, opts.threshold).fitness)
}

/// Searches the enhancement parameters of `variant` that maximize the
/// fitness of the enhanced image.
pub fn tune(
    img: &RgbImage,
    variant: Variant,
    bounds: &ParamBounds,
    cfg: &SwarmConfig,
    opts: &TuneOptions,
) -> Result<TuneResult> {
    tune_observed(img, variant, bounds, cfg, opts, |_| {})
}

/// [`tune`] with a hook that sees the swarm after every iteration.
pub fn tune_observed(
    img: &RgbImage,
    variant: Variant,
    bounds: &ParamBounds,
    cfg: &SwarmConfig,
    opts: &TuneOptions,
    observe: impl FnMut(&Swarm),
) -> Result<TuneResult> {
    bounds.check_variant(variant)?;
    let mut failure = None;
    let fitness_of = |pos: &[f64]| {
        match RetinexParams::from_vector(variant, pos).and_then(|p| score(img, &p, opts)) {
            Ok(f) => f,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    };
    let run = maximize(bounds, cfg, fitness_of, observe)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(TuneResult {
        best_params: RetinexParams::from_vector(variant, &run.best_position)?,
        best_fitness: run.best_fitness,
        history: run.history,
        evaluations: run.evaluations,
        seed: cfg.rng_seed,
        bounds: bounds.clone(),
    })
}
