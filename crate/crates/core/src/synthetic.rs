//! Seeded synthetic data: Gaussian mixtures as density maps or point
//! samples, topic-planted text corpora and the fixture corpus used by the
//! test suites and the `bench` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cluster::{ClusterParams, Connectivity};
use crate::grid::{smooth, DensityMap, Point2D};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An isotropic Gaussian bump; coordinates are in pixels (or data units
/// when sampling points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub cx: f64,
    pub cy: f64,
    pub sigma: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(cx: f64, cy: f64, sigma: f64, amplitude: f64) -> Self {
        Self {
            cx,
            cy,
            sigma,
            amplitude,
        }
    }

    pub fn at(&self, x: f64, y: f64) -> f64 {
        let r2 = (x - self.cx).powi(2) + (y - self.cy).powi(2);
        self.amplitude * (-r2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Total mass of the bump over the plane.
    pub fn mass(&self) -> f64 {
        self.amplitude * self.sigma * self.sigma
    }
}

/// Evaluates the mixture at integer pixel coordinates.
pub fn mixture_map(width: usize, height: usize, bumps: &[Bump]) -> DensityMap {
    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            values.push(bumps.iter().map(|b| b.at(x as f64, y as f64)).sum());
        }
    }
    DensityMap::from_pixels(width, height, values).expect("mixture values are finite")
}

/// `count` bumps with centers inside `[0.1, 0.9]` of each side, widths
/// between 2% and 6% of the larger side and amplitudes in `[0.5, 1.5]`.
pub fn random_bumps(rng: &mut impl Rng, width: usize, height: usize, count: usize) -> Vec<Bump> {
    let side = width.max(height) as f64;
    (0..count)
        .map(|_| Bump {
            cx: rng.gen_range(0.1..0.9) * width as f64,
            cy: rng.gen_range(0.1..0.9) * height as f64,
            sigma: rng.gen_range(0.02..0.06) * side,
            amplitude: rng.gen_range(0.5..1.5),
        })
        .collect()
}

/// Draws `n` points from the mixture, choosing bumps by mass.
pub fn sample_points(rng: &mut impl Rng, bumps: &[Bump], n: usize) -> Vec<Point2D> {
    let total: f64 = bumps.iter().map(Bump::mass).sum();
    let mut cumulative = Vec::with_capacity(bumps.len());
    let mut acc = 0.0;
    for b in bumps {
        acc += b.mass() / total;
        cumulative.push(acc);
    }
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let k = cumulative.partition_point(|&c| c < u).min(bumps.len() - 1);
            let b = &bumps[k];
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            Point2D::new(b.cx + b.sigma * dx, b.cy + b.sigma * dy)
        })
        .collect()
}

/// Benchmark mixture for an `size` x `size` grid: `ceil(size / 10)` bumps.
pub fn bench_bumps(size: usize, seed: u64) -> Vec<Bump> {
    let mut r = rng(seed);
    random_bumps(&mut r, size, size, size.div_ceil(10))
}

/// Points sampled from [`bench_bumps`], in pixel units of the grid.
pub fn bench_points(size: usize, n: usize, seed: u64) -> Vec<Point2D> {
    let bumps = bench_bumps(size, seed);
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    sample_points(&mut r, &bumps, n)
}

/// Two bumps on a horizontal line, `separation` pixels apart. The right
/// bump is shorter (amplitude 0.7).
pub fn two_peaks(separation: usize, sigma: f64) -> DensityMap {
    let margin = (6.0 * sigma).ceil() as usize + 4;
    let width = separation + 2 * margin;
    let height = 2 * margin;
    let left = margin as f64;
    mixture_map(
        width,
        height,
        &[
            Bump::new(left, margin as f64, sigma, 1.0),
            Bump::new(left + separation as f64, margin as f64, sigma, 0.7),
        ],
    )
}

/// The merge fixture: peaks 6 px apart, each 2 px from the shared boundary.
pub fn close_pair() -> DensityMap {
    two_peaks(6, 2.0)
}

/// Peaks 60 px apart, far from any shared boundary.
pub fn distant_pair() -> DensityMap {
    two_peaks(60, 3.0)
}

/// Three overlapping bumps plus a shallow shoulder peak next to the first.
pub fn shoulder_mixture() -> DensityMap {
    mixture_map(
        110,
        100,
        &[
            Bump::new(30.0, 35.0, 7.0, 1.0),
            Bump::new(41.0, 35.0, 2.5, 0.35),
            Bump::new(75.0, 40.0, 8.0, 0.8),
            Bump::new(50.0, 75.0, 6.0, 0.6),
        ],
    )
}

/// Two equal-width lobes joined by a neck well below 10% of the peak.
pub fn dumbbell() -> DensityMap {
    mixture_map(
        80,
        30,
        &[Bump::new(20.0, 15.0, 3.0, 1.0), Bump::new(50.0, 15.0, 3.0, 0.8)],
    )
}

/// A tilted annulus around a smaller central bump.
pub fn ring_with_core() -> DensityMap {
    let (c, radius, width): (f64, f64, f64) = (40.0, 22.0, 3.0);
    let mut values = Vec::with_capacity(81 * 81);
    for y in 0..81 {
        for x in 0..81 {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            let r = dx.hypot(dy);
            let tilt = 1.0 + 0.3 * dx / radius.max(r);
            let ring = tilt * (-(r - radius).powi(2) / (2.0 * width * width)).exp();
            let core = 0.5 * (-(dx * dx + dy * dy) / (2.0 * 9.0)).exp();
            values.push(ring + core);
        }
    }
    DensityMap::from_pixels(81, 81, values).unwrap()
}

/// Smoothed uniform noise quantized to a few levels (plateaus and ties),
/// with a zero border band on some grids.
pub fn plateau_noise(seed: u64, width: usize, height: usize) -> DensityMap {
    let mut r = rng(seed);
    let raw: Vec<f64> = (0..width * height).map(|_| r.gen::<f64>()).collect();
    let noise = DensityMap::from_pixels(width, height, raw).unwrap();
    let sigma = r.gen_range(0.0..1.5);
    let smoothed = smooth(&noise, sigma).unwrap();
    let levels = r.gen_range(3..12) as f64;
    let zero_band = r.gen_bool(0.5);
    let max = smoothed.max().max(f64::MIN_POSITIVE);
    let values = smoothed
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (x, y) = (i % width, i / width);
            if zero_band && (x < 2 || y < 1) {
                0.0
            } else {
                (v / max * levels).round()
            }
        })
        .collect();
    DensityMap::from_pixels(width, height, values).unwrap()
}

/// A named density map with the parameters it should be clustered with.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub density: DensityMap,
    pub params: ClusterParams,
}

impl Fixture {
    fn new(name: impl Into<String>, density: DensityMap) -> Self {
        Self {
            name: name.into(),
            density,
            params: ClusterParams::default(),
        }
    }

    fn with(mut self, f: impl FnOnce(&mut ClusterParams)) -> Self {
        f(&mut self.params);
        self
    }
}

/// The shared fixture corpus for clustering and geometry checks.
pub fn fixture_corpus() -> Vec<Fixture> {
    let mut corpus = vec![
        Fixture::new("close_pair", close_pair()),
        Fixture::new("close_pair_nomerge", close_pair()).with(|p| p.merge_distance_px = 0.0),
        Fixture::new("distant_pair", distant_pair()),
        Fixture::new("shoulder_mixture", shoulder_mixture()),
        Fixture::new("dumbbell_merged", dumbbell()).with(|p| p.merge_distance_px = 40.0),
        Fixture::new("ring_with_core", ring_with_core()),
        Fixture::new("ring_with_core_4", ring_with_core()).with(|p| p.connectivity = Connectivity::Four),
    ];
    for seed in 0..12u64 {
        let mut r = rng(1000 + seed);
        let (w, h) = (r.gen_range(40..120), r.gen_range(40..120));
        let count = r.gen_range(2..14);
        let bumps = random_bumps(&mut r, w, h, count);
        let fixture = Fixture::new(format!("mixture_{seed}"), mixture_map(w, h, &bumps));
        corpus.push(match seed % 3 {
            0 => fixture,
            1 => fixture.with(|p| p.connectivity = Connectivity::Four),
            _ => fixture.with(|p| {
                p.merge_distance_px = 3.0;
                p.truncation_ratio = 0.3;
            }),
        });
    }
    for seed in 0..6u64 {
        let mut r = rng(2000 + seed);
        let (w, h) = (r.gen_range(16..64), r.gen_range(16..64));
        let conn = if seed % 2 == 0 {
            Connectivity::Eight
        } else {
            Connectivity::Four
        };
        corpus.push(
            Fixture::new(format!("plateau_noise_{seed}"), plateau_noise(3000 + seed, w, h))
                .with(|p| p.connectivity = conn),
        );
    }
    corpus
}

/// Words planted in the three topic blobs of [`planted_topics`].
pub const PLANTED_TOPICS: [&str; 3] = ["astronomy", "baking", "finance"];

const FILLER: [&str; 16] = [
    "data", "system", "people", "time", "question", "answer", "example", "thing", "result",
    "problem", "today", "often", "general", "simple", "common", "review",
];

const TOPIC_VOCAB: [[&str; 4]; 3] = [
    ["telescope", "galaxy", "orbit", "planet"],
    ["flour", "oven", "dough", "sugar"],
    ["market", "stock", "bond", "interest"],
];

/// Three well-separated blobs of `per_blob` points each, in data units
/// inside `[0, 100]^2`. Every document carries its blob's planted word,
/// two words of blob vocabulary and shared filler text.
pub fn planted_topics(seed: u64, per_blob: usize) -> Vec<Point2D> {
    let mut r = rng(seed);
    let centers = [(20.0, 25.0), (75.0, 30.0), (45.0, 78.0)];
    let mut points = Vec::with_capacity(3 * per_blob);
    for (topic, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            let dx: f64 = r.sample(StandardNormal);
            let dy: f64 = r.sample(StandardNormal);
            let mut words = vec![PLANTED_TOPICS[topic]];
            for _ in 0..2 {
                words.push(TOPIC_VOCAB[topic][r.gen_range(0..4)]);
            }
            for _ in 0..4 {
                words.push(FILLER[r.gen_range(0..FILLER.len())]);
            }
            points.push(Point2D::new(cx + 5.0 * dx, cy + 5.0 * dy).with_text(words.join(" ")));
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_are_deterministic() {
        assert_eq!(bench_points(100, 50, 7), bench_points(100, 50, 7));
        assert_ne!(bench_points(100, 50, 7), bench_points(100, 50, 8));
        assert_eq!(planted_topics(1, 10), planted_topics(1, 10));
        assert_eq!(bench_bumps(1000, 0).len(), 100);
        assert_eq!(bench_bumps(250, 0).len(), 25);
    }

    #[test]
    fn close_pair_has_two_local_maxima() {
        let d = close_pair();
        let row = d.height() / 2;
        let maxima: Vec<usize> = (1..d.width() - 1)
            .filter(|&x| d.get(x, row) > d.get(x - 1, row) && d.get(x, row) > d.get(x + 1, row))
            .collect();
        assert_eq!(maxima.len(), 2);
        assert_eq!(maxima[1] - maxima[0], 6);
    }

    #[test]
    fn corpus_maps_are_valid() {
        for f in fixture_corpus() {
            assert!(f.params.validate().is_ok(), "{}", f.name);
            assert!(f.density.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }
}
