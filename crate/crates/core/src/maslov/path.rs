use crate::error::{IndexError, Result};
use crate::numerics::{matrix_exp, vstack, Mat, Tolerances};
use crate::symplectic::{HamiltonianMat, LagrangianFrame, SymplecticSpace};

/// A C¹ curve of Lagrangian subspaces on `[a, b]`.
///
/// `frame` must be a smooth full-rank frame of `l(t)`; it is not required to
/// be orthonormal. When `derivative` returns `None` the derivative is taken
/// by finite differences of `frame`.
pub trait LagrangianPath {
    fn space(&self) -> &SymplecticSpace;
    fn domain(&self) -> (f64, f64);
    fn frame(&self, t: f64) -> Mat;
    fn derivative(&self, _t: f64) -> Option<Mat> {
        None
    }
}

/// Step for finite-difference derivatives.
pub fn fd_step(domain: (f64, f64)) -> f64 {
    1e-5 * (domain.1 - domain.0)
}

/// Frame derivative: analytic when available, else central differences in
/// the interior and second-order one-sided differences at the ends.
pub fn frame_derivative<P: LagrangianPath + ?Sized>(path: &P, t: f64) -> Mat {
    if let Some(d) = path.derivative(t) {
        return d;
    }
    let (a, b) = path.domain();
    let h = fd_step((a, b));
    if t - h >= a && t + h <= b {
        (path.frame(t + h) - path.frame(t - h)) / (2.0 * h)
    } else if t - h < a {
        (path.frame(t) * -3.0 + path.frame(t + h) * 4.0 - path.frame(t + 2.0 * h)) / (2.0 * h)
    } else {
        (path.frame(t) * 3.0 - path.frame(t - h) * 4.0 + path.frame(t - 2.0 * h)) / (2.0 * h)
    }
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(IndexError::DimensionMismatch(format!(
            "invalid domain [{a}, {b}]"
        )))
    }
}

/// `t ↦ e^{tH} L` in the standard space.
#[derive(Debug, Clone)]
pub struct OrbitPath {
    h: Mat,
    base: Mat,
    space: SymplecticSpace,
    domain: (f64, f64),
}

impl OrbitPath {
    pub fn new(h: &HamiltonianMat, l: &LagrangianFrame) -> Result<Self> {
        let n = h.half_dim();
        let space = SymplecticSpace::standard(n);
        if *l.space() != space {
            return Err(IndexError::DimensionMismatch(format!(
                "generator of half-dimension {n} with a frame in dimension {}",
                l.space().dim()
            )));
        }
        Ok(Self {
            h: h.matrix().clone(),
            base: l.frame().clone(),
            space,
            domain: (0.0, 1.0),
        })
    }

    pub fn with_domain(mut self, a: f64, b: f64) -> Result<Self> {
        check_domain(a, b)?;
        self.domain = (a, b);
        Ok(self)
    }

    fn flow(&self, t: f64) -> Mat {
        matrix_exp(&(&self.h * t)).expect("finite generator")
    }
}

impl LagrangianPath for OrbitPath {
    fn space(&self) -> &SymplecticSpace {
        &self.space
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn frame(&self, t: f64) -> Mat {
        self.flow(t) * &self.base
    }
    fn derivative(&self, t: f64) -> Option<Mat> {
        Some(&self.h * self.flow(t) * &self.base)
    }
}

/// `t ↦ Gr(e^{tH}) = {(v, e^{tH} v)}` in the doubled space.
#[derive(Debug, Clone)]
pub struct GraphPath {
    h: Mat,
    space: SymplecticSpace,
    domain: (f64, f64),
}

impl GraphPath {
    pub fn new(h: &HamiltonianMat) -> Self {
        Self {
            h: h.matrix().clone(),
            space: SymplecticSpace::product(h.half_dim()),
            domain: (0.0, 1.0),
        }
    }

    pub fn with_domain(mut self, a: f64, b: f64) -> Result<Self> {
        check_domain(a, b)?;
        self.domain = (a, b);
        Ok(self)
    }

    fn flow(&self, t: f64) -> Mat {
        matrix_exp(&(&self.h * t)).expect("finite generator")
    }
}

impl LagrangianPath for GraphPath {
    fn space(&self) -> &SymplecticSpace {
        &self.space
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn frame(&self, t: f64) -> Mat {
        let d = self.h.nrows();
        vstack(&Mat::identity(d, d), &self.flow(t))
    }
    fn derivative(&self, t: f64) -> Option<Mat> {
        let d = self.h.nrows();
        Some(vstack(&Mat::zeros(d, d), &(&self.h * self.flow(t))))
    }
}

type FrameFn = Box<dyn Fn(f64) -> Mat + Send + Sync>;

/// A path given by closures.
pub struct FnPath {
    space: SymplecticSpace,
    domain: (f64, f64),
    frame: FrameFn,
    derivative: Option<FrameFn>,
}

impl FnPath {
    /// Checks that the frame at a few sample instants is Lagrangian.
    pub fn new(
        space: SymplecticSpace,
        domain: (f64, f64),
        frame: impl Fn(f64) -> Mat + Send + Sync + 'static,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        for k in 0..=4 {
            let t = domain.0 + (domain.1 - domain.0) * k as f64 / 4.0;
            LagrangianFrame::new(space.clone(), frame(t), tol)?;
        }
        Ok(Self {
            space,
            domain,
            frame: Box::new(frame),
            derivative: None,
        })
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> Mat + Send + Sync + 'static) -> Self {
        self.derivative = Some(Box::new(d));
        self
    }
}

impl LagrangianPath for FnPath {
    fn space(&self) -> &SymplecticSpace {
        &self.space
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn frame(&self, t: f64) -> Mat {
        (self.frame)(t)
    }
    fn derivative(&self, t: f64) -> Option<Mat> {
        self.derivative.as_ref().map(|d| d(t))
    }
}

/// Reverses the orientation: `s ↦ l(a + b - s)`.
pub struct Reversed<'a, P: LagrangianPath + ?Sized>(pub &'a P);

impl<P: LagrangianPath + ?Sized> LagrangianPath for Reversed<'_, P> {
    fn space(&self) -> &SymplecticSpace {
        self.0.space()
    }
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }
    fn frame(&self, t: f64) -> Mat {
        let (a, b) = self.0.domain();
        self.0.frame(a + b - t)
    }
    fn derivative(&self, t: f64) -> Option<Mat> {
        let (a, b) = self.0.domain();
        self.0.derivative(a + b - t).map(|d| -d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{random_hamiltonian, random_lagrangian, SpectrumProfile};

    #[test]
    fn analytic_derivative_matches_differences() {
        let t = Tolerances::default();
        for seed in 0..10 {
            let h = random_hamiltonian(2, seed, SpectrumProfile::Generic);
            let l = random_lagrangian(2, seed + 50);
            let p = OrbitPath::new(&h, &l).unwrap();
            let frame = {
                let p = p.clone();
                move |s: f64| p.frame(s)
            };
            let fd = FnPath::new(p.space().clone(), (0.0, 1.0), frame, &t).unwrap();
            for s in [0.0, 0.3, 1.0] {
                let exact = p.derivative(s).unwrap();
                let approx = frame_derivative(&fd, s);
                assert!((&exact - approx).norm() < 1e-6 * exact.norm().max(1.0));
            }
        }
    }

    #[test]
    fn graph_path_frames_are_lagrangian() {
        let t = Tolerances::default();
        let h = random_hamiltonian(3, 4, SpectrumProfile::Mixed);
        let p = GraphPath::new(&h);
        for s in [0.0, 0.5, 1.0] {
            assert!(LagrangianFrame::new(p.space().clone(), p.frame(s), &t).is_ok());
        }
    }

    #[test]
    fn domain_validation() {
        let h = HamiltonianMat::rotation(1, 1.0);
        assert!(GraphPath::new(&h).with_domain(1.0, 0.0).is_err());
        assert!(GraphPath::new(&h).with_domain(0.0, 2.0).is_ok());
    }
}
