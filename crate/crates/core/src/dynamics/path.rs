use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::sphere::{ClassicalFlow, Point, SphereFunction, DEFAULT_L_CAP};

/// Time profile of a path generated by a fixed function `f`: `h_t = rate(t) f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `rate = 1`.
    Constant,
    /// `rate = 1 - cos(2 pi t)`: vanishes at both ends, integrates to 1.
    Pulse,
}

impl Profile {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Pulse => 1.0 - (TAU * t).cos(),
        }
    }

    /// `int_0^t rate`.
    pub fn elapsed(&self, t: f64) -> f64 {
        match self {
            Self::Constant => t,
            Self::Pulse => t - (TAU * t).sin() / TAU,
        }
    }
}

#[derive(Debug, Clone)]
enum PathKind {
    Generated {
        f: SphereFunction,
        flow: ClassicalFlow,
        profile: Profile,
    },
    /// Segment `i` of `n` runs on `[i/n, (i+1)/n]` at `n` times the speed.
    Concat(Vec<HamiltonianPath>),
    /// `t -> phi_t psi_t`.
    Product(HamiltonianPath, HamiltonianPath),
    /// `t -> phi_t^{-1}`.
    Inverse(HamiltonianPath),
}

/// Path `t -> phi_t`, `t in [0, 1]`, of Hamiltonian diffeomorphisms of the
/// sphere, together with its zero-mean generating Hamiltonian and its flow.
#[derive(Debug, Clone)]
pub struct HamiltonianPath {
    label: String,
    kind: Arc<PathKind>,
    l_cap: usize,
    /// Transported Hamiltonians already computed, keyed by the bits of `t`.
    cache: Arc<Mutex<HashMap<u64, SphereFunction>>>,
}

fn new_cache() -> Arc<Mutex<HashMap<u64, SphereFunction>>> {
    Arc::new(Mutex::new(HashMap::new()))
}

impl HamiltonianPath {
    pub fn zero() -> Self {
        Self::generated("zero", SphereFunction::zero(), Profile::Constant)
    }

    /// Time-independent path generated by `f` (normalized to zero mean).
    pub fn autonomous(label: impl Into<String>, f: SphereFunction) -> Self {
        Self::generated(label, f, Profile::Constant)
    }

    pub fn generated(label: impl Into<String>, f: SphereFunction, profile: Profile) -> Self {
        let f = f.normalize_zero_mean();
        let flow = ClassicalFlow::of_hamiltonian(&f);
        Self {
            label: label.into(),
            kind: Arc::new(PathKind::Generated { f, flow, profile }),
            l_cap: DEFAULT_L_CAP,
            cache: new_cache(),
        }
    }

    /// `H = (angle / 2) u`: rotation by `-angle` about the `u`-axis.
    pub fn rot_u(angle: f64) -> Self {
        Self::autonomous(format!("rot_u({angle})"), SphereFunction::u() * (angle / 2.0))
    }

    /// `H = (angle / 2) x`.
    pub fn rot_x(angle: f64) -> Self {
        Self::autonomous(format!("rot_x({angle})"), SphereFunction::x() * (angle / 2.0))
    }

    /// The full turn about the `u`-axis (`H = pi u`), generating `pi_1 = Z/2`.
    pub fn two_pi_loop() -> Self {
        Self::rot_u(TAU).with_label("twopiloop")
    }

    /// Two full turns (`H = 2 pi u`), contractible.
    pub fn four_pi_loop() -> Self {
        Self::rot_u(2.0 * TAU).with_label("fourpiloop")
    }

    /// `h_t = (1 - cos 2pi t) f`; same time-one map as the flow of `f`.
    pub fn kick(label: impl Into<String>, f: SphereFunction) -> Self {
        Self::generated(label, f, Profile::Pulse)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Band cap for compositions with flows (products and inverses).
    pub fn with_l_cap(mut self, l_cap: usize) -> Self {
        if l_cap != self.l_cap {
            self.cache = new_cache();
        }
        self.l_cap = l_cap;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn l_cap(&self) -> usize {
        self.l_cap
    }

    /// Runs `paths` one after another, each compressed to an equal share of `[0, 1]`.
    pub fn concat(paths: Vec<HamiltonianPath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Input("concat of no paths".to_string()));
        }
        let label = format!(
            "concat({})",
            paths.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(", ")
        );
        let l_cap = paths.iter().map(|p| p.l_cap).max().unwrap_or(DEFAULT_L_CAP);
        Ok(Self {
            label,
            kind: Arc::new(PathKind::Concat(paths)),
            l_cap,
            cache: new_cache(),
        })
    }

    /// `t -> phi_t psi_t`, generated by `f_t + g_t o phi_t^{-1}`.
    pub fn product(p: &HamiltonianPath, q: &HamiltonianPath) -> Self {
        if p.is_zero() {
            return q.clone();
        }
        if q.is_zero() {
            return p.clone();
        }
        Self {
            label: format!("prod({}, {})", p.label, q.label),
            kind: Arc::new(PathKind::Product(p.clone(), q.clone())),
            l_cap: p.l_cap.max(q.l_cap),
            cache: new_cache(),
        }
    }

    /// `t -> phi_t^{-1}`, generated by `-f_t o phi_t`.
    pub fn inverse(&self) -> Self {
        let label = format!("inv({})", self.label);
        match &*self.kind {
            // An autonomous flow commutes with its generator: -f o phi_t = -f.
            PathKind::Generated {
                f,
                profile: Profile::Constant,
                ..
            } => Self::autonomous(label, -f).with_l_cap(self.l_cap),
            PathKind::Inverse(p) => p.clone(),
            _ => Self {
                label,
                kind: Arc::new(PathKind::Inverse(self.clone())),
                l_cap: self.l_cap,
                cache: new_cache(),
            },
        }
    }

    /// Autonomous path generated by `f o psi^{-1}` where `f` generates `self`
    /// and `psi` is the time-one map of `by`; its time-one map is
    /// `psi phi psi^{-1}`.
    pub fn transported(&self, by: &HamiltonianPath) -> Result<Self> {
        let f = self.autonomous_generator().ok_or_else(|| {
            Error::Input(format!("'{}' is not autonomous and cannot be transported", self.label))
        })?;
        let g = f.compose(|x| by.flow_inverse(1.0, x), self.l_cap.max(by.l_cap))?;
        Ok(Self::autonomous(format!("transport({}, {})", by.label, self.label), g)
            .with_l_cap(self.l_cap.max(by.l_cap)))
    }

    fn is_zero(&self) -> bool {
        matches!(&*self.kind, PathKind::Generated { f, .. } if f.coeffs().iter().all(|&c| c == 0.0))
    }

    /// The generator if the Hamiltonian does not depend on time.
    pub fn autonomous_generator(&self) -> Option<&SphereFunction> {
        match &*self.kind {
            PathKind::Generated {
                f,
                profile: Profile::Constant,
                ..
            } => Some(f),
            _ => None,
        }
    }

    /// Hamiltonian on `[a, b]` when it is a fixed function there.
    pub fn autonomous_on(&self, a: f64, b: f64) -> Option<SphereFunction> {
        match &*self.kind {
            PathKind::Generated {
                f,
                profile: Profile::Constant,
                ..
            } => Some(f.clone()),
            PathKind::Concat(parts) => {
                let n = parts.len() as f64;
                let i = ((a * n).floor() as usize).min(parts.len() - 1);
                let (lo, hi) = (i as f64 / n, (i + 1) as f64 / n);
                if a < lo - 1e-15 || b > hi + 1e-15 {
                    return None;
                }
                parts[i]
                    .autonomous_on((a - lo) * n, (b - lo) * n)
                    .map(|f| f * n)
            }
            _ => None,
        }
    }

    /// Points in `(0, 1)` where the Hamiltonian may jump, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &*self.kind {
            PathKind::Generated { .. } => Vec::new(),
            PathKind::Concat(parts) => {
                let n = parts.len() as f64;
                let mut v = Vec::new();
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        v.push(i as f64 / n);
                    }
                    v.extend(p.breakpoints().into_iter().map(|b| (i as f64 + b) / n));
                }
                v
            }
            PathKind::Product(p, q) => {
                let mut v = p.breakpoints();
                v.extend(q.breakpoints());
                v
            }
            PathKind::Inverse(p) => p.breakpoints(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    /// `phi_t(p)`.
    pub fn flow(&self, t: f64, p: Point) -> Result<Point> {
        match &*self.kind {
            PathKind::Generated { flow, profile, .. } => flow.map(profile.elapsed(t), p),
            PathKind::Concat(parts) => {
                let n = parts.len();
                let (i, s) = segment(t, n);
                let mut x = p;
                for part in &parts[..i] {
                    x = part.flow(1.0, x)?;
                }
                parts[i].flow(s, x)
            }
            PathKind::Product(a, b) => a.flow(t, b.flow(t, p)?),
            PathKind::Inverse(a) => a.flow_inverse(t, p),
        }
    }

    /// `phi_t^{-1}(p)`.
    pub fn flow_inverse(&self, t: f64, p: Point) -> Result<Point> {
        match &*self.kind {
            PathKind::Generated { flow, profile, .. } => flow.map(-profile.elapsed(t), p),
            PathKind::Concat(parts) => {
                let n = parts.len();
                let (i, s) = segment(t, n);
                let mut x = parts[i].flow_inverse(s, p)?;
                for part in parts[..i].iter().rev() {
                    x = part.flow_inverse(1.0, x)?;
                }
                Ok(x)
            }
            PathKind::Product(a, b) => b.flow_inverse(t, a.flow_inverse(t, p)?),
            PathKind::Inverse(a) => a.flow(t, p),
        }
    }

    /// Zero-mean Hamiltonian `f_t`. Left-continuous at breakpoints.
    pub fn hamiltonian(&self, t: f64) -> Result<SphereFunction> {
        let h = match &*self.kind {
            PathKind::Generated { f, profile, .. } => f * profile.rate(t),
            PathKind::Concat(parts) => {
                let n = parts.len();
                let (i, s) = segment(t, n);
                parts[i].hamiltonian(s)? * n as f64
            }
            PathKind::Product(..) | PathKind::Inverse(_) => {
                let key = t.to_bits();
                if let Some(h) = self.cache.lock().expect("cache lock").get(&key) {
                    return Ok(h.clone());
                }
                let h = match &*self.kind {
                    PathKind::Product(a, b) => {
                        let f = a.hamiltonian(t)?;
                        let g = b.hamiltonian(t)?;
                        &f + &g.compose(|x| a.flow_inverse(t, x), self.l_cap)?
                    }
                    PathKind::Inverse(a) => -a.hamiltonian(t)?.compose(|x| a.flow(t, x), self.l_cap)?,
                    _ => unreachable!("outer match"),
                }
                .normalize_zero_mean();
                self.cache.lock().expect("cache lock").insert(key, h.clone());
                return Ok(h);
            }
        };
        Ok(h.normalize_zero_mean())
    }

    /// Largest pointwise displacement of the time-one map over a sample grid.
    pub fn time_one_displacement(&self) -> Result<f64> {
        let grid = crate::sphere::QuadratureGrid::new(9, 16);
        let mut worst = 0.0f64;
        for (u, phi) in grid.points() {
            let p = crate::sphere::point_from_u_phi(u, phi);
            let q = self.flow(1.0, p)?;
            worst = worst.max(crate::sphere::norm(&[q[0] - p[0], q[1] - p[1], q[2] - p[2]]));
        }
        // The poles are not on a Gauss grid; include them.
        for p in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
            let q = self.flow(1.0, p)?;
            worst = worst.max(crate::sphere::norm(&[q[0] - p[0], q[1] - p[1], q[2] - p[2]]));
        }
        Ok(worst)
    }
}

/// Segment index and local time for `t` in an `n`-fold concatenation
/// (left-continuous: `t = i/n` belongs to segment `i - 1`).
fn segment(t: f64, n: usize) -> (usize, f64) {
    let scaled = t.clamp(0.0, 1.0) * n as f64;
    let i = if scaled <= 0.0 {
        0
    } else {
        (scaled.ceil() as usize).clamp(1, n) - 1
    };
    (i, scaled - i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::point_from_u_phi;
    use std::f64::consts::PI;

    fn close(a: &Point, b: &Point, tol: f64) -> bool {
        (0..3).all(|i| (a[i] - b[i]).abs() < tol)
    }

    #[test]
    fn segments_are_left_continuous() {
        assert_eq!(segment(0.0, 3), (0, 0.0));
        let (i, s) = segment(1.0 / 3.0, 3);
        assert_eq!(i, 0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(segment(1.0, 3).0, 2);
    }

    #[test]
    fn pulse_profile_integrates_to_one() {
        let p = Profile::Pulse;
        assert!((p.elapsed(1.0) - 1.0).abs() < 1e-15);
        let (x, w) = crate::sphere::legendre::gauss_legendre_unit(20);
        let integral: f64 = x.iter().zip(&w).map(|(t, w)| w * p.rate(*t)).sum();
        assert!((integral - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_rotation_negates_generator() {
        let p = HamiltonianPath::rot_u(0.8);
        let inv = p.inverse();
        let f = inv.autonomous_generator().unwrap();
        let d = f + &(SphereFunction::u() * 0.4);
        assert!(d.coeffs().iter().all(|c| c.abs() < 1e-15));
        assert!(HamiltonianPath::zero().inverse().is_zero());
    }

    #[test]
    fn product_with_zero_is_identity_operation() {
        let p = HamiltonianPath::rot_x(1.0);
        let z = HamiltonianPath::zero();
        assert_eq!(HamiltonianPath::product(&p, &z).label(), p.label());
        assert_eq!(HamiltonianPath::product(&z, &p).label(), p.label());
    }

    #[test]
    fn product_of_u_rotations_adds_generators() {
        let p = HamiltonianPath::rot_u(0.3);
        let q = HamiltonianPath::rot_u(0.5);
        let pq = HamiltonianPath::product(&p, &q);
        for t in [0.1, 0.7] {
            let h = pq.hamiltonian(t).unwrap();
            let d = &h - &(SphereFunction::u() * 0.4);
            assert!(d.coeffs().iter().all(|c| c.abs() < 1e-13));
        }
    }

    #[test]
    fn product_flow_and_hamiltonian_agree() {
        // d/dt theta_t(x) must equal X_{h_t}(theta_t(x)) = 2 p x grad h_t.
        let p = HamiltonianPath::rot_x(1.0);
        let q = HamiltonianPath::autonomous("u2", SphereFunction::u().product(&SphereFunction::u()));
        let pq = HamiltonianPath::product(&p, &q);
        let x = point_from_u_phi(0.3, 0.4);
        let (t, dt) = (0.6, 1e-5);
        let a = pq.flow(t + dt, x).unwrap();
        let b = pq.flow(t - dt, x).unwrap();
        let c = pq.flow(t, x).unwrap();
        let vel = [(a[0] - b[0]) / (2.0 * dt), (a[1] - b[1]) / (2.0 * dt), (a[2] - b[2]) / (2.0 * dt)];
        let g = pq.hamiltonian(t).unwrap().gradient(&c);
        let field = crate::sphere::cross(&c, &g);
        assert!(close(&vel, &[2.0 * field[0], 2.0 * field[1], 2.0 * field[2]], 1e-7));
    }

    #[test]
    fn inverse_path_generates_inverse_flow() {
        let base = HamiltonianPath::kick("xy", SphereFunction::x().product(&SphereFunction::y())).with_l_cap(16);
        let inv = base.inverse();
        let x = point_from_u_phi(-0.4, 2.0);
        let y = base.flow(0.7, x).unwrap();
        assert!(close(&inv.flow(0.7, y).unwrap(), &x, 1e-9));
        let (t, dt) = (0.4, 1e-5);
        let c = inv.flow(t, x).unwrap();
        let a = inv.flow(t + dt, x).unwrap();
        let b = inv.flow(t - dt, x).unwrap();
        let vel = [(a[0] - b[0]) / (2.0 * dt), (a[1] - b[1]) / (2.0 * dt), (a[2] - b[2]) / (2.0 * dt)];
        let h = inv.hamiltonian(t).unwrap();
        assert!(h.integrate().abs() < 1e-10);
        let field = crate::sphere::cross(&c, &h.gradient(&c));
        assert!(close(&vel, &[2.0 * field[0], 2.0 * field[1], 2.0 * field[2]], 1e-6));
    }

    #[test]
    fn concat_runs_segments_in_order() {
        let a = HamiltonianPath::rot_x(PI / 2.0);
        let b = HamiltonianPath::rot_u(PI / 2.0);
        let c = HamiltonianPath::concat(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(c.breakpoints(), vec![0.5]);
        let x = point_from_u_phi(0.2, 0.1);
        let expected = b.flow(1.0, a.flow(1.0, x).unwrap()).unwrap();
        assert!(close(&c.flow(1.0, x).unwrap(), &expected, 1e-14));
        assert!(close(&c.flow_inverse(1.0, expected).unwrap(), &x, 1e-14));
        // Hamiltonian on the second half is twice that of b.
        let h = c.hamiltonian(0.75).unwrap();
        assert!((h.coeff(1, 0) - 2.0 * b.hamiltonian(0.5).unwrap().coeff(1, 0)).abs() < 1e-15);
        assert!(c.autonomous_on(0.5, 1.0).is_some());
        assert!(c.autonomous_on(0.25, 0.75).is_none());
    }

    #[test]
    fn transported_path_is_conjugate() {
        let r = HamiltonianPath::rot_x(PI / 2.0);
        let inner = HamiltonianPath::autonomous("u2", SphereFunction::u().product(&SphereFunction::u()));
        let t = inner.transported(&r).unwrap();
        let x = point_from_u_phi(-0.3, 2.0);
        let expected = r.flow(1.0, inner.flow(1.0, r.flow_inverse(1.0, x).unwrap()).unwrap()).unwrap();
        assert!(close(&t.flow(1.0, x).unwrap(), &expected, 1e-9));
        assert!(HamiltonianPath::kick("u", SphereFunction::u()).transported(&r).is_err());
    }

    #[test]
    fn loops_return_home() {
        assert!(HamiltonianPath::two_pi_loop().time_one_displacement().unwrap() < 1e-12);
        assert!(HamiltonianPath::four_pi_loop().time_one_displacement().unwrap() < 1e-12);
        assert!(HamiltonianPath::rot_u(1.0).time_one_displacement().unwrap() > 0.1);
    }
}
