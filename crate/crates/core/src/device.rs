use crate::error::Result;
use crate::grids::{build_grids_with, GridSpec, Grids};
use crate::model::Cavity;
use crate::params::{PhysicalParams, Rates};

/// Physical parameters together with the derived cavity and grids; the
/// common input of the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub params: PhysicalParams,
    pub rates: Rates,
    pub cavity: Cavity,
    pub grids: Grids,
}

impl Device {
    pub fn new(params: PhysicalParams, spec: &GridSpec) -> Result<Self> {
        params.validate()?;
        let cavity = Cavity::new(&params)?;
        let grids = build_grids_with(&params, spec)?;
        Ok(Self {
            rates: params.rates(),
            params,
            cavity,
            grids,
        })
    }

    pub fn reference_default() -> Self {
        Self::new(PhysicalParams::default(), &GridSpec::default()).expect("defaults are valid")
    }

    pub fn omega12(&self) -> f64 {
        self.cavity.omega12
    }

    /// Multiplies the light-matter coupling χ by `s` (Rabi frequency scaling).
    pub fn with_coupling_scale(&self, s: f64) -> Self {
        let mut d = self.clone();
        d.cavity.coupling_k *= s * s;
        for c in &mut d.grids.chi_sq {
            *c *= s * s;
        }
        d
    }

    /// Changes the nominal unit of sheet density: all quadrature weights are
    /// multiplied by `factor` and χ² divided by it. Observables expressed
    /// as ratios are unaffected.
    pub fn rescaled_area(&self, factor: f64) -> Self {
        let mut d = self.clone();
        d.cavity.coupling_k /= factor;
        for c in &mut d.grids.chi_sq {
            *c /= factor;
        }
        for w in d.grids.w_k.iter_mut().chain(d.grids.w_q.iter_mut()) {
            *w *= factor;
        }
        d
    }

    /// Coupling χ at the resonant wavevector.
    pub fn chi_res(&self) -> f64 {
        self.cavity.chi(self.cavity.q_res)
    }
}
