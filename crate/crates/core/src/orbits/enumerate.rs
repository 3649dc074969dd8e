use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{is_resonant, linear_frequencies, GaugeHamiltonian, HamiltonianSummary, Surface, Vector};
use super::shooting::{shoot_from_direction, BrakeOrbit, ShootOptions};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateOptions {
    /// Values per angular coordinate of the direction grid.
    pub grid_density: usize,
    pub dedup_tol: f64,
    /// Points per orbit image after arc-length resampling.
    pub resample: usize,
    pub sym_tol: f64,
    pub shoot: ShootOptions,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { grid_density: 64, dedup_tol: 1e-6, resample: 512, sym_tol: 1e-6, shoot: ShootOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub class: Symmetry,
    /// `min_s max_t |x(t + s) + x(t)|` over grid shifts `s`.
    pub defect: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub id: usize,
    pub orbit: BrakeOrbit,
    /// Grid directions whose shot landed in this class.
    pub shots: usize,
    pub symmetry: SymmetryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedShot {
    pub index: usize,
    pub direction: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub hamiltonian: HamiltonianSummary,
    pub directions: usize,
    pub converged: usize,
    pub classes: Vec<OrbitClass>,
    pub failed: Vec<FailedShot>,
    /// Linear frequencies, when `H` is quadratic or an ellipsoid gauge power.
    pub frequencies: Option<Vec<f64>>,
    /// A frequency ratio is rational with denominator ≤ 64: the class count is
    /// grid-resolved and a continuum is suspected.
    pub resonant: Option<bool>,
}

/// Directions on the unit sphere of `Rⁿ` from hyperspherical angles, `density` values
/// per angle (the last angle over `[0, 2π)`, the others over `(0, π)`).
pub fn direction_grid(n: usize, density: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let d = density.max(1);
    let mut out = Vec::new();
    let total = d.pow((n - 1) as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut angles = Vec::with_capacity(n - 1);
        for a in 0..n - 1 {
            let i = rem % d;
            rem /= d;
            angles.push(if a == n - 2 { 2.0 * PI * i as f64 / d as f64 } else { PI * (i as f64 + 0.5) / d as f64 });
        }
        let mut v = vec![0.0; n];
        let mut s = 1.0;
        for (a, &th) in angles.iter().enumerate() {
            v[a] = s * th.cos();
            s *= th.sin();
        }
        v[n - 1] = s;
        out.push(v);
    }
    out
}

/// Symmetric iff some time shift brings `x(t + s)` within `sym_tol` of `−x(t)`.
pub fn classify_symmetry(orbit: &BrakeOrbit, sym_tol: f64) -> SymmetryReport {
    let m = orbit.samples.len() - 1;
    let xs: Vec<Vector> = (0..m).map(|i| orbit.state(i)).collect();
    let mut best = (f64::INFINITY, 0usize);
    for s in 0..m {
        if (&xs[s] + &xs[0]).amax() > 1e-3 {
            continue;
        }
        let mut worst = 0.0f64;
        for t in 0..m {
            worst = worst.max((&xs[(t + s) % m] + &xs[t]).amax());
            if worst >= best.0 {
                break;
            }
        }
        if worst < best.0 {
            best = (worst, s);
        }
    }
    let class = if best.0 <= sym_tol { Symmetry::Symmetric } else { Symmetry::Asymmetric };
    SymmetryReport { class, defect: best.0, shift: best.1 as f64 * orbit.period / m as f64 }
}

fn hermite(p0: &Vector, m0: &Vector, p1: &Vector, m1: &Vector, u: f64) -> Vector {
    let u2 = u * u;
    let u3 = u2 * u;
    p0 * (2.0 * u3 - 3.0 * u2 + 1.0) + m0 * (u3 - 2.0 * u2 + u) + p1 * (-2.0 * u3 + 3.0 * u2) + m1 * (u3 - u2)
}

/// Closed curve through `points` with tangents `tangents` (scaled to segment length).
pub struct OrbitImage {
    points: Vec<Vector>,
    tangents: Vec<Vector>,
}

impl OrbitImage {
    /// Arc-length resampling of the orbit to `m` points, Hermite-interpolated with the
    /// vector field as tangent.
    pub fn new(ham: &GaugeHamiltonian, orbit: &BrakeOrbit, m: usize) -> Result<Self> {
        let k = orbit.samples.len() - 1;
        let xs: Vec<Vector> = (0..=k).map(|i| orbit.state(i)).collect();
        let h = orbit.period / k as f64;
        let vs: Vec<Vector> = xs.iter().map(|x| ham.vector_field(x).map(|v| v * h)).collect::<Result<_>>()?;
        let mut cum = vec![0.0];
        for i in 0..k {
            cum.push(cum[i] + (&xs[i + 1] - &xs[i]).norm());
        }
        let total = cum[k];
        let mut points = Vec::with_capacity(m);
        let mut tangents = Vec::with_capacity(m);
        let mut seg = 0;
        for i in 0..m {
            let s = total * i as f64 / m as f64;
            while seg + 1 < k && cum[seg + 1] < s {
                seg += 1;
            }
            let u = ((s - cum[seg]) / (cum[seg + 1] - cum[seg])).clamp(0.0, 1.0);
            points.push(hermite(&xs[seg], &vs[seg], &xs[seg + 1], &vs[seg + 1], u));
            let dir = ham.vector_field(points.last().unwrap())?;
            tangents.push(dir.normalize() * (total / m as f64));
        }
        Ok(OrbitImage { points, tangents })
    }

    fn distance_to(&self, p: &Vector) -> f64 {
        let m = self.points.len();
        let (j, _) = self.points.iter().enumerate().map(|(i, q)| (i, (q - p).norm_squared())).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut best = f64::INFINITY;
        for a in [(j + m - 1) % m, j] {
            let b = (a + 1) % m;
            let f = |u: f64| (hermite(&self.points[a], &self.tangents[a], &self.points[b], &self.tangents[b], u) - p).norm();
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if f(m1) < f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(f(0.5 * (lo + hi))).min(f(0.0)).min(f(1.0));
        }
        best
    }

    /// Symmetric point-to-curve Hausdorff distance.
    pub fn hausdorff(&self, other: &OrbitImage) -> f64 {
        let a = self.points.iter().map(|p| other.distance_to(p)).fold(0.0, f64::max);
        let b = other.points.iter().map(|p| self.distance_to(p)).fold(0.0, f64::max);
        a.max(b)
    }
}

/// Start at the `L0` point with the lexicographically larger `q`.
fn canonical(orbit: BrakeOrbit) -> BrakeOrbit {
    let n = orbit.dim_half();
    let a = &orbit.samples[0][n..];
    let b = &orbit.samples[orbit.steps_half][n..];
    for i in 0..n {
        if (a[i] - b[i]).abs() > 1e-9 {
            return if b[i] > a[i] { orbit.shifted_half() } else { orbit };
        }
    }
    orbit
}

/// Shoots from every grid direction, reduces to minimal periods and groups the
/// converged orbits into geometric classes.
pub fn enumerate_brake_orbits(ham: &GaugeHamiltonian, opts: &EnumerateOptions) -> Result<Enumeration> {
    let n = ham.dim_half();
    let dirs = direction_grid(n, opts.grid_density);
    let shots: Vec<std::result::Result<BrakeOrbit, String>> =
        dirs.par_iter().map(|d| shoot_from_direction(ham, d, &opts.shoot).map(canonical).map_err(|e| e.to_string())).collect();

    let mut failed = Vec::new();
    // groups of identical initial conditions, then Hausdorff merging of group heads
    let mut heads: Vec<(BrakeOrbit, usize)> = Vec::new();
    let mut converged = 0;
    for (i, s) in shots.into_iter().enumerate() {
        match s {
            Err(reason) => failed.push(FailedShot { index: i, direction: dirs[i].clone(), reason }),
            Ok(o) => {
                converged += 1;
                let x0 = o.start();
                match heads.iter_mut().find(|(h, _)| (h.start() - &x0).amax() < 1e-7 && (h.period - o.period).abs() < 1e-7 * o.period) {
                    Some(h) => h.1 += 1,
                    None => heads.push((o, 1)),
                }
            }
        }
    }
    let images: Vec<OrbitImage> = heads.par_iter().map(|(o, _)| OrbitImage::new(ham, o, opts.resample)).collect::<Result<_>>()?;
    let mut class_of: Vec<usize> = (0..heads.len()).collect();
    for i in 0..heads.len() {
        if class_of[i] != i {
            continue;
        }
        for j in i + 1..heads.len() {
            if class_of[j] == j && (heads[i].0.period - heads[j].0.period).abs() < 1e-6 * heads[i].0.period && images[i].hausdorff(&images[j]) < opts.dedup_tol {
                class_of[j] = i;
            }
        }
    }
    let mut classes: Vec<OrbitClass> = Vec::new();
    for i in 0..heads.len() {
        if class_of[i] == i {
            let shots = (0..heads.len()).filter(|&j| class_of[j] == i).map(|j| heads[j].1).sum();
            let symmetry = classify_symmetry(&heads[i].0, opts.sym_tol);
            classes.push(OrbitClass { id: 0, orbit: heads[i].0.clone(), shots, symmetry });
        }
    }
    classes.sort_by(|a, b| a.orbit.period.partial_cmp(&b.orbit.period).unwrap().then_with(|| a.orbit.samples[0].partial_cmp(&b.orbit.samples[0]).unwrap()));
    for (i, c) in classes.iter_mut().enumerate() {
        c.id = i;
    }
    let frequencies = match (ham.linear_form(), ham.surface()) {
        (Some(q), _) => Some(linear_frequencies(q)),
        (None, Surface::Ellipsoid { form, center }) if center.amax() == 0.0 => Some(linear_frequencies(form)),
        _ => None,
    };
    let resonant = frequencies.as_ref().map(|w| is_resonant(w, 64));
    Ok(Enumeration { hamiltonian: ham.summary(), directions: dirs.len(), converged, classes, failed, frequencies, resonant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(direction_grid(1, 64).len(), 2);
        assert_eq!(direction_grid(2, 64).len(), 64);
        assert_eq!(direction_grid(3, 8).len(), 64);
        for v in direction_grid(3, 8) {
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_copy_has_zero_hausdorff_distance() {
        let ham = GaugeHamiltonian::weighted_quadratic(&[1.0, 2f64.sqrt()], 1.0).unwrap();
        let o = shoot_from_direction(&ham, &[1.0, 0.0], &ShootOptions::default()).unwrap();
        let a = OrbitImage::new(&ham, &o, 512).unwrap();
        let b = OrbitImage::new(&ham, &o.shifted_half(), 512).unwrap();
        assert!(a.hausdorff(&b) < 1e-9);
        let other = shoot_from_direction(&ham, &[0.0, 1.0], &ShootOptions::default()).unwrap();
        let c = OrbitImage::new(&ham, &other, 512).unwrap();
        assert!(a.hausdorff(&c) > 0.1);
    }

    #[test]
    fn axis_libration_is_symmetric() {
        let ham = GaugeHamiltonian::weighted_quadratic(&[1.0, 2f64.sqrt()], 1.0).unwrap();
        let o = shoot_from_direction(&ham, &[0.0, 1.0], &ShootOptions::default()).unwrap();
        assert_eq!(classify_symmetry(&o, 1e-6).class, Symmetry::Symmetric);
    }
}
