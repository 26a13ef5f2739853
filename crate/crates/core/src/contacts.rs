//! Injector and extractor reservoirs and the tunneling rate tables.

use serde::{Deserialize, Serialize};

use crate::fermi::fermi_x;
use crate::grids::Grids;
use crate::model::{subband_energy, Subband};
use crate::params::PhysicalParams;
use crate::units::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Sign of the bias shift: the left reservoir moves by −qV/2.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Applied bias, qV in meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub v: f64,
}

impl BiasPoint {
    pub fn new(v: f64) -> Self {
        Self { v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinibandAlignment {
    /// Gaussian in the offset between the miniband centre and the bottom of
    /// the receiving subband.
    #[default]
    SubbandEdge,
    /// Same Gaussian factor for both subbands, measured from subband 1.
    Common,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub side: Side,
    /// Miniband centre relative to the subband-1 edge at zero bias (meV).
    pub e0: f64,
    pub mu: f64,
    /// Tunneling amplitude Γ (ps⁻¹).
    pub gamma_amp: f64,
    /// Gaussian energy width σ (meV).
    pub sigma: f64,
}

impl ReservoirParams {
    pub fn reference_default(side: Side, e12: f64) -> Self {
        Self {
            side,
            e0: 0.5 * e12,
            mu: e12 / 3.0,
            gamma_amp: 1.0 / 0.4,
            sigma: 0.1 * e12,
        }
    }

    /// Bias-shifted chemical potential.
    pub fn mu_eff(&self, bias: BiasPoint) -> f64 {
        self.mu + self.side.sign() * 0.5 * bias.v
    }

    fn gaussian(&self, j: Subband, bias: BiasPoint, e12: f64, alignment: MinibandAlignment) -> f64 {
        let centre = self.e0 + self.side.sign() * 0.5 * bias.v;
        let edge = match alignment {
            MinibandAlignment::SubbandEdge => j.edge(e12),
            MinibandAlignment::Common => 0.0,
        };
        let d = centre - edge;
        (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Out-tunneling rate into the reservoir from state (j, ε), ps⁻¹.
pub fn out_rate(
    res: &ReservoirParams,
    j: Subband,
    eps_kin: f64,
    bias: BiasPoint,
    params: &PhysicalParams,
    alignment: MinibandAlignment,
) -> f64 {
    let hw = subband_energy(eps_kin, j, params.e12);
    let g = res.gamma_amp * res.gaussian(j, bias, params.e12, alignment);
    g * fermi_x(params.beta() * (res.mu_eff(bias) - hw))
}

/// In-tunneling rate from the reservoir into (j, ε), fixed by detailed
/// balance: in = out·e^{β(μ_eff − ħω_j)}.
pub fn in_rate(
    res: &ReservoirParams,
    j: Subband,
    eps_kin: f64,
    bias: BiasPoint,
    params: &PhysicalParams,
    alignment: MinibandAlignment,
) -> f64 {
    let hw = subband_energy(eps_kin, j, params.e12);
    let g = res.gamma_amp * res.gaussian(j, bias, params.e12, alignment);
    g * fermi_x(params.beta() * (hw - res.mu_eff(bias)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// One k_z level of a reservoir miniband for the elastic-tunneling form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinibandLevel {
    /// Level energy at zero in-plane momentum, relative to the subband-1 edge (meV).
    pub offset: f64,
    /// Reservoir in-plane mass relative to the well mass.
    #[serde(default = "one")]
    pub mass_ratio: f64,
    /// |V|², meV².
    pub coupling_sq: f64,
    /// Lorentzian half-width η (meV).
    pub eta: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MinibandSpec {
    pub levels: Vec<MinibandLevel>,
}

/// Elastic reservoir: chemical potential and miniband levels, both shifted
/// with the bias like the Gaussian reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticReservoir {
    pub side: Side,
    pub mu: f64,
    pub miniband: MinibandSpec,
}

fn lorentzian(x: f64, eta: f64) -> f64 {
    eta / std::f64::consts::PI / (x * x + eta * eta)
}

/// Golden-rule rate with the energy delta broadened into a Lorentzian. The
/// reservoir occupation is taken at the well-state energy (elastic process),
/// so in/out = e^{β(μ_eff − ħω_j)} holds exactly.
pub fn elastic_rate(
    res: &ElasticReservoir,
    j: Subband,
    eps_kin: f64,
    direction: Direction,
    bias: BiasPoint,
    params: &PhysicalParams,
) -> f64 {
    let shift = res.side.sign() * 0.5 * bias.v;
    let hw = subband_energy(eps_kin, j, params.e12);
    let weight: f64 = res
        .miniband
        .levels
        .iter()
        .map(|l| {
            let e_res = l.offset + shift + eps_kin / l.mass_ratio;
            l.coupling_sq * lorentzian(e_res - hw, l.eta)
        })
        .sum();
    let x = params.beta() * (hw - (res.mu + shift));
    let occupation = match direction {
        Direction::In => fermi_x(x),
        Direction::Out => fermi_x(-x),
    };
    2.0 * std::f64::consts::PI / HBAR * weight * occupation
}

/// A reservoir with its rate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contact {
    Gaussian {
        params: ReservoirParams,
        #[serde(default)]
        alignment: MinibandAlignment,
    },
    Elastic(ElasticReservoir),
}

impl Contact {
    pub fn gaussian(params: ReservoirParams) -> Self {
        Contact::Gaussian {
            params,
            alignment: MinibandAlignment::SubbandEdge,
        }
    }

    /// (in, out) rates for state (j, ε).
    pub fn rates(&self, j: Subband, eps: f64, bias: BiasPoint, p: &PhysicalParams) -> (f64, f64) {
        match self {
            Contact::Gaussian { params, alignment } => (
                in_rate(params, j, eps, bias, p, *alignment),
                out_rate(params, j, eps, bias, p, *alignment),
            ),
            Contact::Elastic(r) => (
                elastic_rate(r, j, eps, Direction::In, bias, p),
                elastic_rate(r, j, eps, Direction::Out, bias, p),
            ),
        }
    }

    pub fn mu_eff(&self, bias: BiasPoint) -> f64 {
        match self {
            Contact::Gaussian { params, .. } => params.mu_eff(bias),
            Contact::Elastic(r) => r.mu + r.side.sign() * 0.5 * bias.v,
        }
    }
}

/// Left and right reservoirs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactModel {
    pub left: Contact,
    pub right: Contact,
}

impl ContactModel {
    pub fn reference_default(e12: f64) -> Self {
        Self {
            left: Contact::gaussian(ReservoirParams::reference_default(Side::Left, e12)),
            right: Contact::gaussian(ReservoirParams::reference_default(Side::Right, e12)),
        }
    }

    pub fn with_alignment(mut self, a: MinibandAlignment) -> Self {
        for c in [&mut self.left, &mut self.right] {
            if let Contact::Gaussian { alignment, .. } = c {
                *alignment = a;
            }
        }
        self
    }

    /// Highest zero-bias chemical potential of the two reservoirs.
    pub fn max_mu(&self) -> f64 {
        self.left
            .mu_eff(BiasPoint::new(0.0))
            .max(self.right.mu_eff(BiasPoint::new(0.0)))
    }

    pub fn tables(&self, bias: BiasPoint, grids: &Grids, params: &PhysicalParams) -> RateTable {
        total_rates(&self.left, &self.right, bias, grids, params)
    }
}

/// Per-contact in/out rates on the energy grid for both subbands (ps⁻¹).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactRates {
    pub gin1: Vec<f64>,
    pub gout1: Vec<f64>,
    pub gin2: Vec<f64>,
    pub gout2: Vec<f64>,
}

impl ContactRates {
    fn tabulate(c: &Contact, bias: BiasPoint, grids: &Grids, p: &PhysicalParams) -> Self {
        let mut t = ContactRates::default();
        for &e in &grids.eps {
            let (i1, o1) = c.rates(Subband::One, e, bias, p);
            let (i2, o2) = c.rates(Subband::Two, e, bias, p);
            t.gin1.push(i1);
            t.gout1.push(o1);
            t.gin2.push(i2);
            t.gout2.push(o2);
        }
        t
    }

    fn add(&self, other: &Self) -> Self {
        let s = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Self {
            gin1: s(&self.gin1, &other.gin1),
            gout1: s(&self.gout1, &other.gout1),
            gin2: s(&self.gin2, &other.gin2),
            gout2: s(&self.gout2, &other.gout2),
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        let s = |a: &[f64]| a.iter().map(|x| x * f).collect();
        Self {
            gin1: s(&self.gin1),
            gout1: s(&self.gout1),
            gin2: s(&self.gin2),
            gout2: s(&self.gout2),
        }
    }

    /// Γ^out n − Γ^in (1−n) per k for each subband.
    pub fn imbalance(&self, n1: &[f64], n2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let f = |gi: &[f64], go: &[f64], n: &[f64]| {
            (0..n.len()).map(|k| go[k] * n[k] - gi[k] * (1.0 - n[k])).collect()
        };
        (f(&self.gin1, &self.gout1, n1), f(&self.gin2, &self.gout2, n2))
    }
}

/// Rate tables summed over both reservoirs, with the per-contact parts kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub left: ContactRates,
    pub right: ContactRates,
    pub total: ContactRates,
}

impl RateTable {
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            left: self.left.scaled(f),
            right: self.right.scaled(f),
            total: self.total.scaled(f),
        }
    }
}

pub fn total_rates(
    left: &Contact,
    right: &Contact,
    bias: BiasPoint,
    grids: &Grids,
    params: &PhysicalParams,
) -> RateTable {
    let l = ContactRates::tabulate(left, bias, grids, params);
    let r = ContactRates::tabulate(right, bias, grids, params);
    let total = l.add(&r);
    RateTable {
        left: l,
        right: r,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermi::fermi_dirac;
    use crate::grids::build_grids;

    fn p() -> PhysicalParams {
        PhysicalParams::default()
    }

    #[test]
    fn zero_bias_half_filling() {
        let p = p();
        let r = ReservoirParams::reference_default(Side::Left, p.e12);
        let rate = out_rate(&r, Subband::One, r.mu, BiasPoint::new(0.0), &p, MinibandAlignment::SubbandEdge);
        let expect = 0.5 * r.gamma_amp * (-r.e0 * r.e0 / (2.0 * r.sigma * r.sigma)).exp();
        assert!((rate - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn aligned_left_gaussian_is_one() {
        let p = p();
        let r = ReservoirParams::reference_default(Side::Left, p.e12);
        let bias = BiasPoint::new(2.0 * r.e0);
        let rate = out_rate(&r, Subband::One, 140.0, bias, &p, MinibandAlignment::SubbandEdge);
        assert!((rate - r.gamma_amp * fermi_x(p.beta() * (r.mu_eff(bias) - 140.0))).abs() < 1e-15);
    }

    #[test]
    fn ten_kt_above_mu() {
        let p = p();
        let r = ReservoirParams::reference_default(Side::Left, p.e12);
        let bias = BiasPoint::new(40.0);
        let eps = r.mu_eff(bias) + 10.0 * p.k_t();
        let rate = out_rate(&r, Subband::One, eps, bias, &p, MinibandAlignment::SubbandEdge);
        let g = r.gamma_amp * (-(r.e0 - 20.0f64).powi(2) / (2.0 * r.sigma * r.sigma)).exp();
        assert!((rate / g - (1.0 - 4.54e-5)).abs() < 1e-7);
    }

    #[test]
    fn in_rate_ratios() {
        let p = p();
        let r = ReservoirParams::reference_default(Side::Right, p.e12);
        let bias = BiasPoint::new(30.0);
        let mu = r.mu_eff(bias);
        let a = MinibandAlignment::SubbandEdge;
        let ratio = |e: f64| in_rate(&r, Subband::One, e, bias, &p, a) / out_rate(&r, Subband::One, e, bias, &p, a);
        assert!((ratio(mu) - 1.0).abs() < 1e-14);
        assert!((ratio(mu + p.k_t() * 2f64.ln()) - 0.5).abs() < 1e-14);
        for e in [0.0, 10.0, 75.0, 140.0] {
            for j in [Subband::One, Subband::Two] {
                let i = in_rate(&r, j, e, bias, &p, a);
                let o = out_rate(&r, j, e, bias, &p, a);
                let f = fermi_dirac(subband_energy(e, j, p.e12), mu, p.temperature);
                assert!((i / (i + o) - f).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn common_alignment_matches_edge_for_subband_one() {
        let p = p();
        let r = ReservoirParams::reference_default(Side::Left, p.e12);
        let b = BiasPoint::new(90.0);
        for e in [1.0, 50.0] {
            let a = out_rate(&r, Subband::One, e, b, &p, MinibandAlignment::SubbandEdge);
            let c = out_rate(&r, Subband::One, e, b, &p, MinibandAlignment::Common);
            assert_eq!(a, c);
        }
        let a = out_rate(&r, Subband::Two, 1.0, b, &p, MinibandAlignment::SubbandEdge);
        let c = out_rate(&r, Subband::Two, 1.0, b, &p, MinibandAlignment::Common);
        assert!(a != c);
    }

    #[test]
    fn symmetric_contacts_at_zero_bias() {
        let p = p();
        let g = build_grids(&p, 40, 16).unwrap();
        let t = ContactModel::reference_default(p.e12).tables(BiasPoint::new(0.0), &g, &p);
        assert_eq!(t.left, t.right);
    }

    #[test]
    fn zero_amplitude_gives_zero_tables() {
        let p = p();
        let g = build_grids(&p, 40, 16).unwrap();
        let mut m = ContactModel::reference_default(p.e12);
        for c in [&mut m.left, &mut m.right] {
            if let Contact::Gaussian { params, .. } = c {
                params.gamma_amp = 0.0;
            }
        }
        let t = m.tables(BiasPoint::new(100.0), &g, &p);
        assert!(t.total.gin1.iter().chain(&t.total.gout2).all(|&x| x == 0.0));
    }

    #[test]
    fn elastic_landmarks() {
        let p = p();
        let empty = ElasticReservoir {
            side: Side::Left,
            mu: 50.0,
            miniband: MinibandSpec::default(),
        };
        assert_eq!(elastic_rate(&empty, Subband::One, 3.0, Direction::In, BiasPoint::new(0.0), &p), 0.0);

        let eta = 0.05 * p.e12;
        let level = MinibandLevel {
            offset: 0.0,
            mass_ratio: 1.0,
            coupling_sq: 4.0,
            eta,
        };
        let full = ElasticReservoir {
            side: Side::Left,
            mu: 1e6,
            miniband: MinibandSpec { levels: vec![level] },
        };
        let b = BiasPoint::new(0.0);
        let rin = elastic_rate(&full, Subband::One, 20.0, Direction::In, b, &p);
        let expect = 2.0 * std::f64::consts::PI / HBAR * 4.0 / (std::f64::consts::PI * eta);
        assert!((rin - expect).abs() < 1e-12 * expect);
        assert_eq!(elastic_rate(&full, Subband::One, 20.0, Direction::Out, b, &p), 0.0);
    }

    #[test]
    fn tables_are_smooth() {
        // finite difference of the out-rate table vs the analytic derivative
        let p = p();
        let g = build_grids(&p, 4000, 16).unwrap();
        let res = ReservoirParams::reference_default(Side::Left, p.e12);
        let m = ContactModel {
            left: Contact::gaussian(res.clone()),
            right: Contact::gaussian(ReservoirParams {
                gamma_amp: 0.0,
                ..ReservoirParams::reference_default(Side::Right, p.e12)
            }),
        };
        let bias = BiasPoint::new(60.0);
        let t = m.tables(bias, &g, &p);
        let b = p.beta();
        let gauss = res.gamma_amp * (-(res.e0 - 30.0f64).powi(2) / (2.0 * res.sigma.powi(2))).exp();
        for k in (100..3900).step_by(97) {
            let fd = (t.total.gout1[k + 1] - t.total.gout1[k - 1]) / (2.0 * g.d_eps);
            let f = fermi_x(b * (res.mu_eff(bias) - g.eps[k]));
            let analytic = gauss * b * f * (1.0 - f);
            assert!((fd - analytic).abs() <= 0.01 * analytic.abs() + 1e-14, "k={k} {fd} {analytic}");
        }
    }
}
