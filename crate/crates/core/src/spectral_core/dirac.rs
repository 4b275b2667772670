use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Representation, SpinorField};
use super::multiplier::{apply_multiplier, MultiplierSpec};
use crate::error::{Error, Result};

/// Branch label ± of the half-wave splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// How the coupling enters ∂ₜψ±: `Hamiltonian` uses γ = −iκ♯ (charge
/// conserving), `Literal` takes the coupling term at face value,
/// γ = −κ♯, which is dissipative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    #[default]
    Hamiltonian,
    Literal,
}

/// ℓ = 1 (honeycomb power nonlinearity) or ℓ = 2 (Hartree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum NonlinearitySelector {
    #[default]
    Power,
    Hartree,
}

impl NonlinearitySelector {
    pub fn ell(self) -> u8 {
        match self {
            NonlinearitySelector::Power => 1,
            NonlinearitySelector::Hartree => 2,
        }
    }

    /// Scaling-critical Sobolev index s(ℓ).
    pub fn critical_index(self) -> f64 {
        match self {
            NonlinearitySelector::Power => 0.5,
            NonlinearitySelector::Hartree => 0.0,
        }
    }
}

impl TryFrom<u8> for NonlinearitySelector {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(NonlinearitySelector::Power),
            2 => Ok(NonlinearitySelector::Hartree),
            _ => Err(format!("ell must be 1 or 2, got {v}")),
        }
    }
}

impl From<NonlinearitySelector> for u8 {
    fn from(v: NonlinearitySelector) -> u8 {
        v.ell()
    }
}

/// Physical constants of the equation. Missing fields take the defaults
/// κ = 1, λ♯ = 1, b₁ = b₂ = 1, ℓ = 1, Hamiltonian coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracParams {
    pub kappa: f64,
    pub lambda_sharp: Complex64,
    pub b1: f64,
    pub b2: f64,
    pub ell: NonlinearitySelector,
    pub coupling_form: CouplingForm,
    #[serde(skip)]
    sign_fault: bool,
}

impl Default for DiracParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            lambda_sharp: Complex64::new(1.0, 0.0),
            b1: 1.0,
            b2: 1.0,
            ell: NonlinearitySelector::Power,
            coupling_form: CouplingForm::Hamiltonian,
            sign_fault: false,
        }
    }
}

impl DiracParams {
    pub fn new(kappa: f64, lambda_sharp: Complex64, b1: f64, b2: f64, ell: NonlinearitySelector) -> Result<Self> {
        let p = Self { kappa, lambda_sharp, b1, b2, ell, ..Default::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_lambda_sharp(mut self, lambda_sharp: Complex64) -> Self {
        self.lambda_sharp = lambda_sharp;
        self
    }

    pub fn with_ell(mut self, ell: NonlinearitySelector) -> Self {
        self.ell = ell;
        self
    }

    pub fn with_bloch_amplitudes(mut self, b1: f64, b2: f64) -> Self {
        self.b1 = b1;
        self.b2 = b2;
        self
    }

    pub fn with_coupling_form(mut self, form: CouplingForm) -> Self {
        self.coupling_form = form;
        self
    }

    /// Flip the sign inside the Π^− symbol. Used only to check that the
    /// verification suite notices a broken projection.
    #[doc(hidden)]
    pub fn with_injected_sign_fault(mut self) -> Self {
        self.sign_fault = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() {
            return Err(Error::invalid("kappa", "must be finite"));
        }
        let l = self.lambda_sharp.norm();
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::invalid("lambda_sharp", "must be a finite nonzero complex number"));
        }
        if !(self.b1.is_finite() && self.b1 > 0.0) {
            return Err(Error::invalid("b1", "must be positive"));
        }
        if !(self.b2.is_finite() && self.b2 > 0.0) {
            return Err(Error::invalid("b2", "must be positive"));
        }
        Ok(())
    }

    /// κ♯ = κ/|λ♯|.
    pub fn kappa_sharp(&self) -> f64 {
        self.kappa / self.lambda_sharp.norm()
    }

    /// Coefficient γ in ∂ₜψ± = ∓i|∇|ψ± + γΠ±[N(ψ,ψ)ψ].
    pub fn gamma(&self) -> Complex64 {
        let k = self.kappa_sharp();
        match self.coupling_form {
            CouplingForm::Hamiltonian => Complex64::new(0.0, -k),
            CouplingForm::Literal => Complex64::new(-k, 0.0),
        }
    }

    /// Symbol α·ξ = [[0, λ̄(ξ₁ − iξ₂)], [λ(ξ₁ + iξ₂), 0]].
    pub fn alpha_dot(&self, xi: [f64; 2]) -> [[Complex64; 2]; 2] {
        let z = Complex64::new(xi[0], xi[1]);
        let zero = Complex64::new(0.0, 0.0);
        [[zero, self.lambda_sharp.conj() * z.conj()], [self.lambda_sharp * z, zero]]
    }

    /// Π^±(ξ) = ½(I ± α·ξ/(|λ♯||ξ|)), with Π^±(0) = ½I.
    pub fn projection_matrix(&self, xi: [f64; 2], sign: Sign) -> [[Complex64; 2]; 2] {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let r = xi[0].hypot(xi[1]);
        if r == 0.0 {
            return [[half, zero], [zero, half]];
        }
        let mut s = sign.value();
        if self.sign_fault && sign == Sign::Minus {
            s = -s;
        }
        let a = self.alpha_dot(xi);
        let c = 0.5 * s / (self.lambda_sharp.norm() * r);
        [[half, a[0][1] * c], [a[1][0] * c, half]]
    }
}

fn apply_matrix_field(f: &SpinorField, m: impl Fn([f64; 2]) -> [[Complex64; 2]; 2]) -> SpinorField {
    let repr = f.repr();
    let mut g = f.in_frequency();
    let grid = *g.grid();
    let [a, b] = g.components_mut();
    for idx in 0..grid.len() {
        let mm = m(grid.xi(idx));
        let (x, y) = (a[idx], b[idx]);
        a[idx] = mm[0][0] * x + mm[0][1] * y;
        b[idx] = mm[1][0] * x + mm[1][1] * y;
    }
    g.to_repr(repr);
    g
}

/// Π^±(D)f.
pub fn dirac_projection(f: &SpinorField, sign: Sign, p: &DiracParams) -> SpinorField {
    apply_matrix_field(f, |xi| p.projection_matrix(xi, sign))
}

/// α·D f, with symbol α·ξ.
pub fn dirac_operator(f: &SpinorField, p: &DiracParams) -> SpinorField {
    apply_matrix_field(f, |xi| p.alpha_dot(xi))
}

/// S±(t)f = e^{∓it|∇|}f.
pub fn half_wave_propagate(f: &SpinorField, t: f64, sign: Sign) -> Result<SpinorField> {
    let m = MultiplierSpec::half_wave(*f.grid(), t, sign.value())?;
    apply_multiplier(f, &m)
}

/// Frequency-space S±(t) applied in place.
pub(crate) fn half_wave_in_place(f: &mut SpinorField, t: f64, sign: Sign) {
    debug_assert_eq!(f.repr(), Representation::Frequency);
    let grid = *f.grid();
    let s = sign.value();
    let phases: Vec<Complex64> = (0..grid.len()).map(|i| Complex64::from_polar(1.0, -s * t * grid.abs_xi(i))).collect();
    for v in f.components_mut().iter_mut() {
        for (z, ph) in v.iter_mut().zip(&phases) {
            *z *= ph;
        }
    }
}
