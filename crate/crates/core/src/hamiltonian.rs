//! Hamiltonians and ideal unitaries for a chain of ions with local phonon
//! modes: nearest-mode hopping, carrier and sideband drives, the dispersive
//! limit of a detuned sideband, and the instantaneous phase-shift and
//! rotation operators used to flip the sign of hopping.
//!
//! All rates are angular frequencies (rad/s). A drive's `rabi` is the Rabi
//! frequency `2g` of its reference transition: `|↓,1⟩↔|↑,0⟩` for the red
//! sideband, `|↓,0⟩↔|↑,1⟩` for the blue sideband, `|↓⟩↔|↑⟩` for the carrier.

use crate::error::{Error, Result};
use crate::operators::{
    annihilation, embed, number, spin_ops, Factor, HilbertLayout, Matrix, Operator, OperatorKind,
    Vector, C64, I, ZERO,
};

/// Symmetric matrix of hopping rates κ_ij (rad/s).
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingGraph {
    kappa: Vec<Vec<f64>>,
}

impl HoppingGraph {
    pub fn new(kappa: Vec<Vec<f64>>) -> Result<Self> {
        let n = kappa.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty hopping graph".into()));
        }
        for (i, row) in kappa.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "hopping row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &k) in row.iter().enumerate() {
                if !k.is_finite() || k < 0.0 {
                    return Err(Error::InvalidParameter(format!("κ[{i}][{j}] = {k}")));
                }
                if i == j && k != 0.0 {
                    return Err(Error::InvalidParameter(format!("κ[{i}][{i}] must be zero")));
                }
                if k != kappa[j][i] {
                    return Err(Error::InvalidParameter(format!("κ[{i}][{j}] ≠ κ[{j}][{i}]")));
                }
            }
        }
        Ok(HoppingGraph { kappa })
    }

    /// Two ions coupled at rate `kappa`.
    pub fn pair(kappa: f64) -> Result<Self> {
        HoppingGraph::new(vec![vec![0.0, kappa], vec![kappa, 0.0]])
    }

    /// `n` ions with no coupling.
    pub fn uncoupled(n: usize) -> Self {
        HoppingGraph {
            kappa: vec![vec![0.0; n]; n],
        }
    }

    pub fn n_ions(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self, i: usize, j: usize) -> f64 {
        self.kappa[i][j]
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.kappa
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sideband {
    Red,
    Blue,
    Carrier,
}

/// A rectangular laser drive on one ion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveParams {
    pub ion: usize,
    pub sideband: Sideband,
    /// `2g` for sidebands, `Ω` for the carrier (rad/s).
    pub rabi: f64,
    /// Detuning Δ from the transition (rad/s), 0 when resonant.
    pub detuning: f64,
    /// Drive phase φ (rad).
    pub phase: f64,
}

impl DriveParams {
    pub fn resonant(ion: usize, sideband: Sideband, rabi: f64) -> Self {
        DriveParams {
            ion,
            sideband,
            rabi,
            detuning: 0.0,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    /// Coupling `g = rabi / 2`.
    pub fn g(&self) -> f64 {
        self.rabi / 2.0
    }

    /// Duration of a resonant pulse of area `theta` on the reference transition.
    pub fn duration_for_area(&self, theta: f64) -> f64 {
        theta / self.rabi
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi > 0.0 && self.rabi.is_finite()) {
            return Err(Error::InvalidParameter(format!("rabi frequency {}", self.rabi)));
        }
        if !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidParameter("non-finite detuning or phase".into()));
        }
        if self.sideband == Sideband::Carrier && self.detuning != 0.0 {
            return Err(Error::InvalidParameter("detuned carrier drives are not modelled".into()));
        }
        Ok(())
    }
}

fn mode_op(op: &Operator, site: usize, layout: &HilbertLayout) -> Result<Operator> {
    embed(op, site, Factor::Mode, layout)
}

fn spin_op(op: &Operator, site: usize, layout: &HilbertLayout) -> Result<Operator> {
    embed(op, site, Factor::Spin, layout)
}

/// `c X + c* X†`, Hermitian by construction.
fn hermitian_pair(x: &Matrix, c: C64) -> Operator {
    let m = x * c + x.adjoint() * c.conj();
    Operator::with_kind(m, OperatorKind::Hermitian)
}

/// `H = Σ_{i<j} (κ_ij/2)(a_i a_j† + a_i† a_j)`, identity on every spin.
pub fn build_hopping(graph: &HoppingGraph, layout: &HilbertLayout) -> Result<Operator> {
    if graph.n_ions() != layout.n_ions() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_ions(),
            got: graph.n_ions(),
        });
    }
    let a = annihilation(layout.fock_cutoff())?;
    let modes: Vec<Operator> = (0..layout.n_ions())
        .map(|i| mode_op(&a, i, layout))
        .collect::<Result<_>>()?;
    let mut h = Operator::zeros(layout.dim());
    for i in 0..layout.n_ions() {
        for j in i + 1..layout.n_ions() {
            let k = graph.kappa(i, j);
            if k == 0.0 {
                continue;
            }
            let x = modes[i].compose(&modes[j].adjoint())?;
            h = h.plus(&hermitian_pair(x.matrix(), C64::from(k / 2.0)))?;
        }
    }
    Ok(h)
}

/// Red: `g(e^{iφ} a†σ⁻ + e^{-iφ} aσ⁺) + (Δ/2)σ_z`.
/// Blue: `g(e^{iφ} a†σ⁺ + e^{-iφ} aσ⁻) + (Δ/2)σ_z`.
///
/// A nonzero Δ is the off-resonant drive written in the frame rotating with
/// the laser, which keeps the Hamiltonian time independent.
pub fn build_sideband(params: &DriveParams, layout: &HilbertLayout) -> Result<Operator> {
    params.validate()?;
    layout.check_site(params.ion)?;
    let spins = spin_ops();
    let spin_part = match params.sideband {
        Sideband::Red => &spins.lower,
        Sideband::Blue => &spins.raise,
        Sideband::Carrier => {
            return Err(Error::InvalidParameter(
                "carrier drives are built with build_carrier".into(),
            ))
        }
    };
    let a_dag = mode_op(&annihilation(layout.fock_cutoff())?.adjoint(), params.ion, layout)?;
    let x = a_dag.compose(&spin_op(spin_part, params.ion, layout)?)?;
    let coupling = hermitian_pair(x.matrix(), C64::from_polar(params.g(), params.phase));
    if params.detuning == 0.0 {
        return Ok(coupling);
    }
    let sz = spin_op(&spins.z, params.ion, layout)?.scaled(params.detuning / 2.0);
    coupling.plus(&sz)
}

/// `H = (Ω/2)(e^{iφ}σ⁺ + e^{-iφ}σ⁻)` on one ion's spin.
pub fn build_carrier(ion: usize, rabi: f64, phase: f64, layout: &HilbertLayout) -> Result<Operator> {
    DriveParams::resonant(ion, Sideband::Carrier, rabi)
        .with_phase(phase)
        .validate()?;
    layout.check_site(ion)?;
    let sp = spin_op(&spin_ops().raise, ion, layout)?;
    Ok(hermitian_pair(sp.matrix(), C64::from_polar(rabi / 2.0, phase)))
}

/// Dispatch on the drive's sideband.
pub fn build_drive(params: &DriveParams, layout: &HilbertLayout) -> Result<Operator> {
    match params.sideband {
        Sideband::Carrier => build_carrier(params.ion, params.rabi, params.phase, layout),
        _ => build_sideband(params, layout),
    }
}

/// `H = χ σ_z a†a` on one ion.
pub fn build_dispersive(ion: usize, chi: f64, layout: &HilbertLayout) -> Result<Operator> {
    if !chi.is_finite() {
        return Err(Error::InvalidParameter(format!("χ = {chi}")));
    }
    let sz = spin_op(&spin_ops().z, ion, layout)?;
    let n = mode_op(&number(layout.fock_cutoff())?, ion, layout)?;
    let m = sz.matrix() * n.matrix() * C64::from(chi);
    Ok(Operator::with_kind(m, OperatorKind::Hermitian))
}

/// Effective dispersive strength `χ = g²/Δ` of a detuned sideband drive.
pub fn dispersive_chi(rabi: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 {
        return Err(Error::InvalidParameter("dispersive limit needs Δ ≠ 0".into()));
    }
    let g = rabi / 2.0;
    Ok(g * g / detuning)
}

/// `U = exp(iθ a_k† a_k)`: phase `e^{iθn}` on Fock level `n` of mode `k`.
pub fn phase_shift_unitary(mode: usize, theta: f64, layout: &HilbertLayout) -> Result<Operator> {
    let d = layout.fock_cutoff();
    let diag = Vector::from_fn(d, |n, _| C64::from_polar(1.0, theta * n as f64));
    let local = Operator::with_kind(Matrix::from_diagonal(&diag), OperatorKind::Unitary);
    mode_op(&local, mode, layout)
}

/// Closed-form `R(θ, φ) = exp[i(θ/2)(e^{iφ} X + e^{-iφ} X†)]` with
/// `X = a†σ⁻` (red), `a†σ⁺` (blue) or `σ⁺` (carrier).
///
/// The area θ refers to the reference transition, so a sideband pair
/// `{|·,n⟩, |·,n+1⟩}` rotates by `θ√(n+1)`. Built block by block rather than
/// through an eigendecomposition.
///
/// With this sign convention `R(θ, φ)` equals the propagator of the matching
/// resonant drive Hamiltonian with phase `φ + π` for duration `θ / rabi`.
pub fn rotation_unitary(params: &DriveParams, theta: f64, layout: &HilbertLayout) -> Result<Operator> {
    params.validate()?;
    if params.detuning != 0.0 {
        return Err(Error::InvalidParameter(
            "rotation operators are resonant; evolve detuned drives with a propagator".into(),
        ));
    }
    layout.check_site(params.ion)?;
    let d = layout.fock_cutoff();
    let local_index = |spin: usize, n: usize| spin * d + n;
    let alpha = theta / 2.0;
    let e_phi = C64::from_polar(1.0, params.phase);

    let mut u = Matrix::identity(2 * d, 2 * d);
    // (upper, lower, strength) with ⟨upper|X|lower⟩ = √strength
    let pairs: Vec<(usize, usize, f64)> = match params.sideband {
        Sideband::Red => (0..d - 1)
            .map(|n| (local_index(0, n + 1), local_index(1, n), (n + 1) as f64))
            .collect(),
        Sideband::Blue => (0..d - 1)
            .map(|n| (local_index(1, n + 1), local_index(0, n), (n + 1) as f64))
            .collect(),
        Sideband::Carrier => (0..d).map(|n| (local_index(1, n), local_index(0, n), 1.0)).collect(),
    };
    for (p, q, strength) in pairs {
        let angle = alpha * strength.sqrt();
        let (s, c) = angle.sin_cos();
        u[(p, p)] = C64::from(c);
        u[(q, q)] = C64::from(c);
        u[(p, q)] = I * s * e_phi;
        u[(q, p)] = I * s * e_phi.conj();
    }
    embed_site(&u, params.ion, layout)
}

/// Lift an operator on one ion's full `spin ⊗ mode` factor.
fn embed_site(local: &Matrix, site: usize, layout: &HilbertLayout) -> Result<Operator> {
    // spin ⊗ mode on the same ion is a contiguous block, so embedding the
    // site is a Kronecker product with identities left and right
    let k = layout.site_dim();
    let left = k.pow(site as u32);
    let right = k.pow((layout.n_ions() - 1 - site) as u32);
    let dim = layout.dim();
    let mut m = Matrix::zeros(dim, dim);
    for i in 0..k {
        for j in 0..k {
            let v = local[(i, j)];
            if v == ZERO {
                continue;
            }
            for l in 0..left {
                for r in 0..right {
                    m[((l * k + i) * right + r, (l * k + j) * right + r)] = v;
                }
            }
        }
    }
    Ok(Operator::with_kind(m, OperatorKind::Unitary))
}

/// Off-resonant excitation estimate `P_Δ ≈ 4g²/Δ²`, capped at 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffResonantEstimate {
    pub probability: f64,
    /// False once |Δ| ≤ 2g, where the perturbative estimate saturates.
    pub within_validity: bool,
}

pub fn offresonant_excitation_estimate(rabi: f64, detuning: f64) -> Result<OffResonantEstimate> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::InvalidParameter(format!("detuning {detuning}")));
    }
    let raw = rabi * rabi / (detuning * detuning);
    Ok(OffResonantEstimate {
        probability: raw.min(1.0),
        within_validity: detuning.abs() > rabi.abs(),
    })
}
