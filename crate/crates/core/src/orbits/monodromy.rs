use nalgebra::{Complex, Matrix4};

use crate::error::Result;
use crate::integrate::{solve, StepControl, VectorField};

/// Relative coordinate step of the centered strobe differences.
pub const CENTERED_STEP: f64 = 1e-5;
/// Relative coordinate step of the centered right-hand-side differences.
const RHS_STEP: f64 = 5e-6;

/// Endpoint of the flow of `field` from `(t0, x)` over `dt`.
pub fn flow_field<F: VectorField<4>>(
    field: &F,
    t0: f64,
    x: [f64; 4],
    dt: f64,
    control: &StepControl,
) -> Result<[f64; 4]> {
    let out = solve(field, t0, x, t0 + dt, control, |_| {})?;
    out.termination.into_result()?;
    Ok(out.y)
}

/// Monodromy by centered differences of the time-`period` map.
pub fn monodromy_fd_field<F: VectorField<4>>(
    field: &F,
    t0: f64,
    x: [f64; 4],
    period: f64,
    control: &StepControl,
) -> Result<Matrix4<f64>> {
    let mut m = Matrix4::zeros();
    for j in 0..4 {
        let h = CENTERED_STEP * (1.0 + x[j].abs());
        let mut plus = x;
        let mut minus = x;
        plus[j] += h;
        minus[j] -= h;
        let fp = flow_field(field, t0, plus, period, control)?;
        let fm = flow_field(field, t0, minus, period, control)?;
        for i in 0..4 {
            m[(i, j)] = (fp[i] - fm[i]) / (plus[j] - minus[j]);
        }
    }
    Ok(m)
}

/// State and fundamental matrix, `Y` stored column by column after `x`.
struct Variational<'a, F> {
    field: &'a F,
}

impl<F: VectorField<4>> Variational<'_, F> {
    fn jacobian(&self, t: f64, x: &[f64; 4]) -> Result<Matrix4<f64>> {
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let h = RHS_STEP * (1.0 + x[j].abs());
            let mut plus = *x;
            let mut minus = *x;
            plus[j] += h;
            minus[j] -= h;
            let fp = self.field.eval(t, &plus)?;
            let fm = self.field.eval(t, &minus)?;
            for i in 0..4 {
                jac[(i, j)] = (fp[i] - fm[i]) / (plus[j] - minus[j]);
            }
        }
        Ok(jac)
    }
}

impl<F: VectorField<4>> VectorField<20> for Variational<'_, F> {
    fn eval(&self, t: f64, y: &[f64; 20]) -> Result<[f64; 20]> {
        let x = [y[0], y[1], y[2], y[3]];
        let f = self.field.eval(t, &x)?;
        let jac = self.jacobian(t, &x)?;
        let big_y = Matrix4::from_column_slice(&y[4..]);
        let dy = jac * big_y;
        let mut out = [0.0; 20];
        out[..4].copy_from_slice(&f);
        out[4..].copy_from_slice(dy.as_slice());
        Ok(out)
    }

    fn guard(&self, y: &[f64; 20]) -> f64 {
        self.field.guard(&[y[0], y[1], y[2], y[3]])
    }
}

/// Monodromy by integrating the variational equations alongside the orbit.
pub fn monodromy_var_field<F: VectorField<4>>(
    field: &F,
    t0: f64,
    x: [f64; 4],
    period: f64,
    control: &StepControl,
) -> Result<Matrix4<f64>> {
    let mut y0 = [0.0; 20];
    y0[..4].copy_from_slice(&x);
    y0[4..].copy_from_slice(Matrix4::<f64>::identity().as_slice());
    let var = Variational { field };
    let out = solve(&var, t0, y0, t0 + period, control, |_| {})?;
    out.termination.into_result()?;
    Ok(Matrix4::from_column_slice(&out.y[4..]))
}

/// Eigenvalues of a monodromy matrix, sorted by modulus (largest first).
pub fn floquet(m: &Matrix4<f64>) -> [Complex<f64>; 4] {
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    out
}

/// `‖a − b‖∞ / ‖b‖∞` with the row-sum norm.
pub fn relative_difference(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    row_sum_norm(&(a - b)) / row_sum_norm(b)
}

fn row_sum_norm(m: &Matrix4<f64>) -> f64 {
    (0..4)
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
