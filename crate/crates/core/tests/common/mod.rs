//! Shared fixtures: the six forcing cells and an Euler–Lagrange oracle built
//! from the Cartesian position with forward-mode dual numbers.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use kapitza_core::dynamics::{ForcingSpec, Params, State};

pub const T: f64 = 2.0 * PI;

pub fn cell(k: u32, forcing: ForcingSpec) -> Params {
    Params::with_k(k, 5.0, T, 1.0, forcing).unwrap()
}

pub fn rotating(a: f64) -> ForcingSpec {
    ForcingSpec::Rotating { amplitude: a }
}

pub fn oscillating(a: f64, alpha: f64) -> ForcingSpec {
    ForcingSpec::OscillatingAngle {
        amplitude: a,
        alpha,
    }
}

/// The six parameter cells `k ∈ {10, 50}` × three forcings.
pub fn forcing_cells() -> Vec<(String, Params)> {
    let mut cells = Vec::new();
    for k in [10, 50] {
        cells.push((format!("k={k} A=6 rotating"), cell(k, rotating(6.0))));
        cells.push((
            format!("k={k} A=3/2 alpha=pi/2"),
            cell(k, oscillating(1.5, PI / 2.0)),
        ));
        cells.push((
            format!("k={k} A=3/2 alpha=pi"),
            cell(k, oscillating(1.5, PI)),
        ));
    }
    cells
}

/// Start for attractor seeding: slightly off the upright position.
pub fn near_upright() -> State {
    State::new(0.01, PI / 2.0 - 0.01, 0.0, 0.0)
}

pub trait Num:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Num for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dual<N> {
    pub re: N,
    pub eps: N,
}

impl<N: Num> Dual<N> {
    pub fn var(re: N, eps: N) -> Self {
        Self { re, eps }
    }
}

impl<N: Num> Add for Dual<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::var(self.re + o.re, self.eps + o.eps)
    }
}

impl<N: Num> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::var(self.re - o.re, self.eps - o.eps)
    }
}

impl<N: Num> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::var(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<N: Num> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::var(-self.re, -self.eps)
    }
}

impl<N: Num> Num for Dual<N> {
    fn cst(v: f64) -> Self {
        Dual::var(N::cst(v), N::cst(0.0))
    }
    fn sin(self) -> Self {
        Dual::var(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::var(self.re.cos(), -(self.eps * self.re.sin()))
    }
}

/// Point mass on the unit sphere around the pivot `(0, h, 0)`.
fn position<N: Num>(theta: N, phi: N, h: f64) -> [N; 3] {
    [
        theta.cos() * phi.cos(),
        N::cst(h) + theta.cos() * phi.sin(),
        theta.sin(),
    ]
}

/// `L = ½|ṙ|² − y` with unit mass and gravity along `−y`.
fn lagrangian<N: Num>(q: [N; 2], qd: [N; 2], h: f64, hdot: f64) -> N {
    let r = position(Dual::var(q[0], qd[0]), Dual::var(q[1], qd[1]), h);
    let v = [r[0].eps, r[1].eps + N::cst(hdot), r[2].eps];
    N::cst(0.5) * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - r[1].re
}

fn seeded(v: [f64; 2], j: usize) -> [Dual<f64>; 2] {
    std::array::from_fn(|i| Dual::var(v[i], if i == j { 1.0 } else { 0.0 }))
}

fn constant(v: [f64; 2]) -> [Dual<f64>; 2] {
    std::array::from_fn(|i| Dual::var(v[i], 0.0))
}

fn momentum(q: [f64; 2], qd: [f64; 2], h: f64, hdot: f64) -> [f64; 2] {
    std::array::from_fn(|j| lagrangian(constant(q), seeded(qd, j), h, hdot).eps)
}

/// Tangent vectors `∂r/∂θ`, `∂r/∂φ`.
fn tangents(q: [f64; 2]) -> [[f64; 3]; 2] {
    std::array::from_fn(|j| {
        let s = seeded(q, j);
        position(s[0], s[1], 0.0).map(|c| c.eps)
    })
}

/// Oracle inputs at time `t`.
pub struct Drive {
    pub h: f64,
    pub hdot: f64,
    pub px: f64,
    pub pz: f64,
    pub mu: f64,
}

impl Drive {
    /// Pivot `h = aε sin(ωt/ε)` and a force `A(cos ωt, sin ωt)`.
    pub fn rotating(a: f64, eps: f64, period: f64, mu: f64, amp: f64, t: f64) -> Self {
        let w = 2.0 * PI / period;
        Self {
            h: a * eps * (w * t / eps).sin(),
            hdot: a * w * (w * t / eps).cos(),
            px: amp * (w * t).cos(),
            pz: amp * (w * t).sin(),
            mu,
        }
    }

    /// Same pivot with a force of magnitude `A` at angle `α − α cos ωt`.
    pub fn oscillating(
        a: f64,
        eps: f64,
        period: f64,
        mu: f64,
        amp: f64,
        alpha: f64,
        t: f64,
    ) -> Self {
        let w = 2.0 * PI / period;
        let angle = alpha - alpha * (w * t).cos();
        Self {
            px: amp * angle.cos(),
            pz: amp * angle.sin(),
            ..Self::rotating(a, eps, period, mu, 0.0, t)
        }
    }
}

/// `(θ̇, φ̇, ṗ_θ, ṗ_φ)` from the Lagrange equations with friction `−μ v_rel`
/// and the horizontal force as generalized forces.
pub fn euler_lagrange(x: &State, d: &Drive) -> [f64; 4] {
    let q = [x.theta, x.phi];
    let p = [x.p_theta, x.p_phi];
    // p is affine in q̇: p = M q̇ + b
    let b = momentum(q, [0.0, 0.0], d.h, d.hdot);
    let c0 = momentum(q, [1.0, 0.0], d.h, d.hdot);
    let c1 = momentum(q, [0.0, 1.0], d.h, d.hdot);
    let m = [[c0[0] - b[0], c1[0] - b[0]], [c0[1] - b[1], c1[1] - b[1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let r = [p[0] - b[0], p[1] - b[1]];
    let qd = [
        (m[1][1] * r[0] - m[0][1] * r[1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ];

    let dl_dq: [f64; 2] =
        std::array::from_fn(|j| lagrangian(seeded(q, j), constant(qd), d.h, d.hdot).eps);
    let tan = tangents(q);
    let v_rel: [f64; 3] = std::array::from_fn(|i| qd[0] * tan[0][i] + qd[1] * tan[1][i]);
    let force: [f64; 3] = [
        -d.mu * v_rel[0] + d.px,
        -d.mu * v_rel[1],
        -d.mu * v_rel[2] + d.pz,
    ];
    let gen: [f64; 2] = std::array::from_fn(|j| (0..3).map(|i| force[i] * tan[j][i]).sum::<f64>());
    [qd[0], qd[1], dl_dq[0] + gen[0], dl_dq[1] + gen[1]]
}

/// `‖a − b‖∞ / max(1, ‖b‖∞)`.
pub fn rel_err(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    diff / scale
}
