//! Problem instances: window, start point, initial datum φ, forcing g and
//! the regularity metadata the bounds need.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::stable::{StableSpec, SubordinatorSpec, TimeWindow};

/// A scalar field on R^d.
pub trait Field: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

impl<F> Field for F
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// What is known about a field in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `κ` everywhere.
    Const(f64),
    /// `κ |x|^η` with the Euclidean norm.
    Power { kappa: f64, eta: f64 },
    /// Anything else; evaluated only through its callback.
    Opaque,
}

#[derive(Clone)]
pub struct Function {
    field: Arc<dyn Field>,
    shape: Shape,
}

impl Function {
    pub fn constant(kappa: f64) -> Self {
        Function { field: Arc::new(move |_: &[f64]| kappa), shape: Shape::Const(kappa) }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `κ |x|^η`.
    pub fn power(kappa: f64, eta: f64) -> Self {
        let field = move |x: &[f64]| {
            let r = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
            kappa * libm::pow(r, eta)
        };
        Function { field: Arc::new(field), shape: Shape::Power { kappa, eta } }
    }

    pub fn opaque<F: Field + 'static>(field: F) -> Self {
        Function { field: Arc::new(field), shape: Shape::Opaque }
    }

    /// A callback with a declared shape, for callers that can vouch for it.
    pub fn with_shape<F: Field + 'static>(field: F, shape: Shape) -> Self {
        Function { field: Arc::new(field), shape }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.field.eval(x)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        self.shape == Shape::Const(0.0)
    }

    /// Growth exponent `p` with `|f(x)| = O(|x|^p)`, when the shape tells.
    pub fn growth(&self) -> Option<f64> {
        match self.shape {
            Shape::Const(_) => Some(0.0),
            Shape::Power { kappa, eta } => Some(if kappa == 0.0 { 0.0 } else { eta }),
            Shape::Opaque => None,
        }
    }
}

impl fmt::Debug for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Function({:?})", self.shape)
    }
}

/// Which state the Riemann sum reads on each step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Endpoint {
    /// `g` at the state before the step: t_i = (i - 1) h.
    #[default]
    Left,
    /// `g` at the state after the step.
    Right,
}

/// A full problem instance.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub sub: SubordinatorSpec,
    pub stable: StableSpec,
    pub win: TimeWindow,
    pub x: Vec<f64>,
    pub phi: Function,
    pub g: Function,
    /// Hölder exponent of `g` in the anisotropic norm Σ|x_i|^γ.
    pub gamma: f64,
    /// Hölder constant of `g`.
    pub lip: f64,
    /// `p` with `|φ(x)| = O(|x|^p)`; `None` when unknown.
    pub phi_growth: Option<f64>,
    pub endpoint: Endpoint,
}

impl ProblemSpec {
    /// Problem with φ ≡ 0 and g ≡ 0 started at the origin.
    pub fn new(sub: SubordinatorSpec, stable: StableSpec, win: TimeWindow) -> Self {
        ProblemSpec {
            sub,
            stable,
            win,
            x: alloc::vec![0.0; stable.dim()],
            phi: Function::zero(),
            g: Function::zero(),
            gamma: default_gamma(stable.beta()),
            lip: 0.0,
            phi_growth: Some(0.0),
            endpoint: Endpoint::Left,
        }
    }

    pub fn with_x(mut self, x: Vec<f64>) -> Self {
        self.x = x;
        self
    }

    /// Sets φ; its growth exponent is taken from the shape when known.
    pub fn with_phi(mut self, phi: Function) -> Self {
        self.phi_growth = phi.growth();
        self.phi = phi;
        self
    }

    pub fn with_phi_growth(mut self, growth: f64) -> Self {
        self.phi_growth = Some(growth);
        self
    }

    /// Sets g and derives (γ, L) from its shape when possible; see [`holder_of`].
    pub fn with_g(mut self, g: Function) -> Self {
        if let Some((gamma, lip)) = holder_of(g.shape(), self.stable.beta()) {
            self.gamma = gamma;
            self.lip = lip;
        }
        self.g = g;
        self
    }

    pub fn with_holder(mut self, gamma: f64, lip: f64) -> Self {
        self.gamma = gamma;
        self.lip = lip;
        self
    }

    pub fn with_endpoint(mut self, endpoint: Endpoint) -> Self {
        self.endpoint = endpoint;
        self
    }

    pub fn dim(&self) -> usize {
        self.stable.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.sub.alpha()
    }

    pub fn beta(&self) -> f64 {
        self.stable.beta()
    }

    pub fn abar(&self) -> f64 {
        self.win.abar()
    }

    /// Checks the standing assumptions: 0 < γ < β/2, L ≥ 0, x ∈ R^d.
    pub fn validate(&self) -> Result<()> {
        let beta = self.beta();
        if !(self.gamma > 0.0 && self.gamma < beta / 2.0) {
            return Err(Error::domain("gamma", self.gamma, "0 < gamma < beta/2"));
        }
        if !(self.lip >= 0.0 && self.lip.is_finite()) {
            return Err(Error::domain("lip", self.lip, "lip >= 0"));
        }
        if self.x.len() != self.dim() {
            return Err(Error::domain("x", self.x.len() as f64, "x must have d coordinates"));
        }
        if let Some(&bad) = self.x.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain("x", bad, "finite start point"));
        }
        if let Some(p) = self.phi_growth {
            if !(p >= 0.0) {
                return Err(Error::domain("phi_growth", p, "phi_growth >= 0"));
            }
        }
        Ok(())
    }

    /// Requires the growth condition behind the central limit theorem, p < β/2.
    pub fn require_clt_growth(&self) -> Result<()> {
        let beta = self.beta();
        match self.phi_growth {
            Some(p) if p < beta / 2.0 => Ok(()),
            Some(p) => Err(Error::domain("phi_growth", p, "phi_growth < beta/2")),
            None => Err(Error::Config("growth of phi is unknown; declare it explicitly".into())),
        }
    }

    /// `|x|` (Euclidean).
    pub fn x_norm(&self) -> f64 {
        libm::sqrt(self.x.iter().map(|v| v * v).sum::<f64>())
    }
}

/// Hölder exponent used when `g` does not pin one down (constant forcing).
pub fn default_gamma(beta: f64) -> f64 {
    beta / 4.0
}

/// (γ, L) for catalog shapes.
///
/// `κ|x|^η` with 0 < η ≤ 1 satisfies `|g(x) - g(y)| ≤ κ|x - y|^η ≤ κ Σ|x_i - y_i|^η`,
/// so (γ, L) = (η, |κ|) whenever η < β/2. Constants are Hölder with L = 0.
pub fn holder_of(shape: Shape, beta: f64) -> Option<(f64, f64)> {
    match shape {
        Shape::Const(_) => Some((default_gamma(beta), 0.0)),
        Shape::Power { kappa, .. } if kappa == 0.0 => Some((default_gamma(beta), 0.0)),
        Shape::Power { kappa, eta } if eta > 0.0 && eta <= 1.0 && eta < beta / 2.0 => Some((eta, libm::fabs(kappa))),
        _ => None,
    }
}
