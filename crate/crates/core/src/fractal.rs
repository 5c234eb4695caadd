//! Synthetic point sets with analytically known fractional dimension, used
//! as ground truth when validating the dimension estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trajectory::StateVector;

/// Lorenz system parameters; the classic chaotic regime by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub dt: f64,
    pub burn_in: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            dt: 0.01,
            burn_in: 1000,
        }
    }
}

/// Supported generators. Embedded dimension is 2, except Lorenz (3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FractalKind {
    /// Evenly spaced points on the unit segment; dimension 1.
    Line,
    /// Evenly spaced points on the unit circle; dimension 1.
    Circle,
    /// I.i.d. uniform points in the unit square; dimension 2.
    SquareUniform,
    /// Chaos-game Sierpinski triangle; dimension log 3 / log 2 ≈ 1.585.
    Sierpinski,
    /// Vertex set of the level-k Koch curve; dimension log 4 / log 3 ≈ 1.262.
    /// The point count is 4^level + 1, independent of `n_points`.
    Koch { level: u32 },
    /// Samples along a Lorenz attractor orbit; box-counting estimates land
    /// near 2.06.
    Lorenz,
}

/// A fully specified generation request.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalSpec {
    pub kind: FractalKind,
    pub n_points: usize,
    pub seed: u64,
    pub lorenz: LorenzParams,
}

impl FractalSpec {
    pub fn new(kind: FractalKind, n_points: usize, seed: u64) -> Self {
        Self {
            kind,
            n_points,
            seed,
            lorenz: LorenzParams::default(),
        }
    }
}

/// Generate the point set described by `spec`.
pub fn generate(spec: &FractalSpec) -> Vec<StateVector> {
    match spec.kind {
        FractalKind::Line => line(spec.n_points),
        FractalKind::Circle => circle(spec.n_points),
        FractalKind::SquareUniform => square_uniform(spec.n_points, spec.seed),
        FractalKind::Sierpinski => sierpinski(spec.n_points, spec.seed),
        FractalKind::Koch { level } => koch(level),
        FractalKind::Lorenz => lorenz(spec.n_points, spec.seed, &spec.lorenz),
    }
}

fn line(n: usize) -> Vec<StateVector> {
    if n == 1 {
        return vec![vec![0.0, 0.0]];
    }
    (0..n)
        .map(|i| vec![i as f64 / (n - 1) as f64, 0.0])
        .collect()
}

fn circle(n: usize) -> Vec<StateVector> {
    (0..n)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vec![phi.cos(), phi.sin()]
        })
        .collect()
}

fn square_uniform(n: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
        .collect()
}

/// Chaos game: jump halfway toward a uniformly random triangle vertex, with
/// the first 100 iterates discarded as transient.
fn sierpinski(n: usize, seed: u64) -> Vec<StateVector> {
    const VERTICES: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.866_025_403_784_438_6)];
    const DISCARD: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut y) = (0.5, 0.289);
    let mut points = Vec::with_capacity(n);
    for i in 0..n + DISCARD {
        let (vx, vy) = VERTICES[rng.random_range(0..3)];
        x = (x + vx) / 2.0;
        y = (y + vy) / 2.0;
        if i >= DISCARD {
            points.push(vec![x, y]);
        }
    }
    points
}

/// Vertices of the level-k Koch curve over the unit base segment.
fn koch(level: u32) -> Vec<StateVector> {
    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 0.0)];
    let (sin60, cos60) = (0.866_025_403_784_438_6, 0.5);
    for _ in 0..level {
        let mut next = Vec::with_capacity(points.len() * 4);
        for pair in points.windows(2) {
            let (ax, ay) = pair[0];
            let (bx, by) = pair[1];
            let (dx, dy) = ((bx - ax) / 3.0, (by - ay) / 3.0);
            let p1 = (ax + dx, ay + dy);
            let p3 = (ax + 2.0 * dx, ay + 2.0 * dy);
            // Peak: rotate the middle third by +60 degrees about p1.
            let p2 = (
                p1.0 + dx * cos60 - dy * sin60,
                p1.1 + dx * sin60 + dy * cos60,
            );
            next.extend_from_slice(&[pair[0], p1, p2, p3]);
        }
        next.push(*points.last().unwrap());
        points = next;
    }
    points.into_iter().map(|(x, y)| vec![x, y]).collect()
}

fn lorenz_derivative(s: &[f64; 3], p: &LorenzParams) -> [f64; 3] {
    [
        p.sigma * (s[1] - s[0]),
        s[0] * (p.rho - s[2]) - s[1],
        s[0] * s[1] - p.beta * s[2],
    ]
}

fn rk4_step(s: &[f64; 3], p: &LorenzParams) -> [f64; 3] {
    let h = p.dt;
    let k1 = lorenz_derivative(s, p);
    let mid1 = [
        s[0] + 0.5 * h * k1[0],
        s[1] + 0.5 * h * k1[1],
        s[2] + 0.5 * h * k1[2],
    ];
    let k2 = lorenz_derivative(&mid1, p);
    let mid2 = [
        s[0] + 0.5 * h * k2[0],
        s[1] + 0.5 * h * k2[1],
        s[2] + 0.5 * h * k2[2],
    ];
    let k3 = lorenz_derivative(&mid2, p);
    let end = [s[0] + h * k3[0], s[1] + h * k3[1], s[2] + h * k3[2]];
    let k4 = lorenz_derivative(&end, p);
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

fn lorenz(n: usize, seed: u64, params: &LorenzParams) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = [
        1.0 + 0.2 * (rng.random::<f64>() - 0.5),
        1.0 + 0.2 * (rng.random::<f64>() - 0.5),
        1.0 + 0.2 * (rng.random::<f64>() - 0.5),
    ];
    for _ in 0..params.burn_in {
        state = rk4_step(&state, params);
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        state = rk4_step(&state, params);
        points.push(state.to_vec());
    }
    points
}
