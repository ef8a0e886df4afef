//! Model parameters and the biological-age Markov chain.
//!
//! A cell of age i in {0, .., n-1} receives a random inflow of k damaged
//! proteins, then divides with probability b_{i+k}. On division the mother
//! retains each protein independently with probability p and the daughter
//! receives the rest; without division the mother keeps everything. Ages are
//! capped at the senescence state n, which is absorbing.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numerics::{find_root_bracketed, DenseMatrix, ROOT_TOL};
use crate::Result;

/// Slack accepted on the inflow pmf sum before construction rejects it;
/// anything closer to 1 is renormalized exactly.
pub const PMF_SUM_SLACK: f64 = 1e-9;

/// Snap width used when a rejuvenation root lands on an integer lattice
/// point of n*y.
const LATTICE_SNAP: f64 = 1e-9;

/// General model parameters: state count, inflow distribution, retention
/// probability and per-age division probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n: usize,
    inflow_pmf: Vec<f64>,
    p: f64,
    division_probs: Vec<f64>,
    malpha: Option<MAlphaParams>,
}

impl ModelParams {
    /// Validates and normalizes the raw ingredients. The inflow pmf must sum
    /// to 1 within `PMF_SUM_SLACK` and is renormalized to machine precision;
    /// all probabilities must lie in [0, 1].
    pub fn new(n: usize, inflow_pmf: Vec<f64>, p: f64, division_probs: Vec<f64>) -> Result<Self> {
        Self::build(n, inflow_pmf, p, division_probs, None)
    }

    fn build(
        n: usize,
        mut inflow_pmf: Vec<f64>,
        p: f64,
        division_probs: Vec<f64>,
        malpha: Option<MAlphaParams>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "retention probability must lie in [0, 1], got {p}"
            )));
        }
        if inflow_pmf.is_empty() {
            return Err(Error::InvalidParams("inflow pmf must be non-empty".into()));
        }
        for (k, q) in inflow_pmf.iter().enumerate() {
            if !q.is_finite() || *q < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "inflow pmf entry {k} must be finite and nonnegative, got {q}"
                )));
            }
        }
        let sum: f64 = inflow_pmf.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_SLACK {
            return Err(Error::InvalidParams(format!(
                "inflow pmf sums to {sum}, not 1"
            )));
        }
        for q in inflow_pmf.iter_mut() {
            *q /= sum;
        }
        for (i, b) in division_probs.iter().enumerate() {
            if !b.is_finite() || !(0.0..=1.0).contains(b) {
                return Err(Error::InvalidParams(format!(
                    "division probability {i} must lie in [0, 1], got {b}"
                )));
            }
        }
        Ok(ModelParams {
            n,
            inflow_pmf,
            p,
            division_probs,
            malpha,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn retention(&self) -> f64 {
        self.p
    }

    pub fn inflow_pmf(&self) -> &[f64] {
        &self.inflow_pmf
    }

    pub fn division_probs(&self) -> &[f64] {
        &self.division_probs
    }

    /// q_k, zero beyond the stored support.
    #[inline]
    pub fn inflow_prob(&self, k: usize) -> f64 {
        self.inflow_pmf.get(k).copied().unwrap_or(0.0)
    }

    /// b_i, zero beyond the stored table.
    #[inline]
    pub fn division_prob(&self, i: usize) -> f64 {
        self.division_probs.get(i).copied().unwrap_or(0.0)
    }

    /// Largest inflow with positive stored mass (support bound K).
    pub fn max_inflow(&self) -> usize {
        self.inflow_pmf.len() - 1
    }

    /// Expected division probability after inflow from age i.
    pub fn mean_division_prob(&self, i: usize) -> f64 {
        self.inflow_pmf
            .iter()
            .enumerate()
            .map(|(k, q)| q * self.division_prob(i + k))
            .sum()
    }

    /// The (m, alpha) source of these parameters, if any.
    pub fn malpha(&self) -> Option<&MAlphaParams> {
        self.malpha.as_ref()
    }

    /// Same chain with the retention probability replaced by 1 - p. Used for
    /// the daughter side of the mean matrix; drops the (m, alpha) tag.
    pub(crate) fn flip_retention(&self) -> ModelParams {
        ModelParams {
            n: self.n,
            inflow_pmf: self.inflow_pmf.clone(),
            p: 1.0 - self.p,
            division_probs: self.division_probs.clone(),
            malpha: None,
        }
    }
}

/// The two-parameter family: constant inflow m per step and division
/// probability b_i = 1 - (i/n)^alpha for 0 <= i <= n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MAlphaParams {
    n: usize,
    m: usize,
    p: f64,
    alpha: f64,
}

impl MAlphaParams {
    pub fn new(n: usize, m: usize, p: f64, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(
                "the (m, alpha) family needs n >= 2".into(),
            ));
        }
        if m == 0 || m >= n {
            return Err(Error::InvalidParams(format!(
                "m must lie in 1..n-1, got m={m} with n={n}"
            )));
        }
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "retention probability must lie in [0, 1], got {p}"
            )));
        }
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha must be >= 1, got {alpha}"
            )));
        }
        Ok(MAlphaParams { n, m, p, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// b_i = 1 - (i/n)^alpha for i <= n (zero beyond).
    pub fn division_prob(&self, i: usize) -> f64 {
        if i > self.n {
            0.0
        } else {
            1.0 - (i as f64 / self.n as f64).powf(self.alpha)
        }
    }

    /// Expansion into general parameters, keeping the (m, alpha) tag.
    pub fn params(&self) -> ModelParams {
        let mut inflow = vec![0.0; self.m + 1];
        inflow[self.m] = 1.0;
        let division = (0..=self.n).map(|i| self.division_prob(i)).collect();
        ModelParams::build(self.n, inflow, self.p, division, Some(*self))
            .expect("validated (m, alpha) parameters expand cleanly")
    }

    /// Expected jump size d_i of the age chain in closed form.
    pub fn expected_jump(&self, i: usize) -> f64 {
        let n = self.n as f64;
        if i + self.m >= self.n {
            return n - i as f64;
        }
        let reach = (i + self.m) as f64;
        self.m as f64 - (1.0 - self.p) * reach * (1.0 - (reach / n).powf(self.alpha))
    }
}

/// Serializable surface for model parameters: either the (m, alpha) family
/// or the general ingredient list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    MAlpha(MAlphaSpec),
    General(GeneralSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MAlphaSpec {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSpec {
    pub n: usize,
    pub inflow_pmf: Vec<f64>,
    pub p: f64,
    pub division_probs: Vec<f64>,
}

impl TryFrom<ModelSpec> for ModelParams {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<ModelParams> {
        match spec {
            ModelSpec::MAlpha(s) => Ok(MAlphaParams::new(s.n, s.m, s.p, s.alpha)?.params()),
            ModelSpec::General(s) => ModelParams::new(s.n, s.inflow_pmf, s.p, s.division_probs),
        }
    }
}

impl ModelSpec {
    /// Spec for an (m, alpha)-family model; validation happens on conversion
    /// to `ModelParams`.
    pub fn malpha(n: usize, m: usize, p: f64, alpha: f64) -> ModelSpec {
        ModelSpec::MAlpha(MAlphaSpec { n, m, p, alpha })
    }

    /// Overrides individual parameters in place. A general spec accepts only
    /// a retention override: n, m and alpha name family parameters.
    pub fn override_with(
        &mut self,
        n: Option<usize>,
        m: Option<usize>,
        p: Option<f64>,
        alpha: Option<f64>,
    ) -> std::result::Result<(), String> {
        match self {
            ModelSpec::MAlpha(s) => {
                if let Some(n) = n {
                    s.n = n;
                }
                if let Some(m) = m {
                    s.m = m;
                }
                if let Some(p) = p {
                    s.p = p;
                }
                if let Some(alpha) = alpha {
                    s.alpha = alpha;
                }
                Ok(())
            }
            ModelSpec::General(s) => {
                if n.is_some() || m.is_some() || alpha.is_some() {
                    return Err(
                        "--n/--m/--alpha override the (m, alpha) family; this model is general"
                            .to_string(),
                    );
                }
                if let Some(p) = p {
                    s.p = p;
                }
                Ok(())
            }
        }
    }
}

impl From<&ModelParams> for ModelSpec {
    fn from(params: &ModelParams) -> ModelSpec {
        match params.malpha() {
            Some(ma) => ModelSpec::MAlpha(MAlphaSpec {
                n: ma.n(),
                m: ma.m(),
                p: ma.p(),
                alpha: ma.alpha(),
            }),
            None => ModelSpec::General(GeneralSpec {
                n: params.n(),
                inflow_pmf: params.inflow_pmf().to_vec(),
                p: params.retention(),
                division_probs: params.division_probs().to_vec(),
            }),
        }
    }
}

/// Binomial point mass C(k, j) p^j (1-p)^(k-j), zero for j > k.
///
/// Evaluated as a direct product with the choose factors interleaved with
/// powers of p, which stays in f64 range up to k around 1000 and keeps the
/// relative error near machine precision; beyond that a log-space fallback
/// trades a little accuracy for range.
pub fn binomial_weight(k: usize, j: usize, p: f64) -> f64 {
    if j > k {
        return 0.0;
    }
    if p <= 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if j == k { 1.0 } else { 0.0 };
    }
    if k <= 1000 {
        let mut acc = 1.0;
        for t in 1..=j {
            acc *= (k - j + t) as f64 / t as f64 * p;
        }
        let q = 1.0 - p;
        for _ in 0..k - j {
            acc *= q;
        }
        acc
    } else {
        let mut lg = 0.0;
        for t in 1..=j {
            lg += ((k - j + t) as f64 / t as f64).ln();
        }
        (lg + j as f64 * p.ln() + (k - j) as f64 * (1.0 - p).ln()).exp()
    }
}

/// One-step transition matrices of the age chain on {0, .., n}: Q collects
/// the no-division moves, R the division moves, and P = Q + R.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    n: usize,
    q: DenseMatrix,
    r: DenseMatrix,
    p: DenseMatrix,
}

impl TransitionKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Full transition matrix P = Q + R, (n+1) x (n+1).
    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    /// No-division part.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// Division part (mother outcomes).
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }
}

/// Builds the transition kernel for the given parameters. Sums over the
/// inflow truncate exactly at i + K where K bounds the inflow support.
pub fn transition_kernel(params: &ModelParams) -> TransitionKernel {
    let n = params.n();
    let kmax = params.max_inflow();
    let p = params.retention();
    let mut q = DenseMatrix::zeros(n + 1, n + 1);
    let mut r = DenseMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            if j >= i && j - i <= kmax {
                q.set(i, j, params.inflow_prob(j - i) * (1.0 - params.division_prob(j)));
            }
            let mut mass = 0.0;
            for k in i.max(j)..=i + kmax {
                let w = params.inflow_prob(k - i);
                if w == 0.0 {
                    continue;
                }
                mass += w * params.division_prob(k) * binomial_weight(k, j, p);
            }
            r.set(i, j, mass);
        }
        // Landing at n: inflow pushes past the cap, with or without division.
        let mut q_abs = 0.0;
        let mut r_abs = 0.0;
        for k in i.max(n)..=i + kmax {
            let w = params.inflow_prob(k - i);
            if w == 0.0 {
                continue;
            }
            let b = params.division_prob(k);
            q_abs += w * (1.0 - b);
            let mut tail = 0.0;
            for jj in n..=k {
                tail += binomial_weight(k, jj, p);
            }
            r_abs += w * b * tail;
        }
        q.set(i, n, q_abs);
        r.set(i, n, r_abs);
    }
    q.set(n, n, 1.0);
    let p_mat = q.add(&r);
    TransitionKernel { n, q, r, p: p_mat }
}

/// Expected next age h_i and expected jump d_i = h_i - i for every state.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpProfile {
    pub h: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn jump_profile(kernel: &TransitionKernel) -> JumpProfile {
    let n = kernel.n();
    let mut h = Vec::with_capacity(n + 1);
    let mut d = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let row = kernel.p().row(i);
        let hi: f64 = row.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
        h.push(hi);
        d.push(hi - i as f64);
    }
    JumpProfile { h, d }
}

/// States strictly pulled toward lower age: { i in 1..n-1 : d_i < 0 }.
pub fn rejuvenation_states(kernel: &TransitionKernel) -> Vec<usize> {
    let profile = jump_profile(kernel);
    (1..kernel.n())
        .filter(|&i| profile.d[i] < 0.0)
        .collect()
}

/// Contiguous block of rejuvenation states for the (m, alpha) family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejuvenationInterval {
    Empty,
    Interval { i1: usize, i2: usize, y1: f64, y2: f64 },
}

impl RejuvenationInterval {
    pub fn is_empty(&self) -> bool {
        matches!(self, RejuvenationInterval::Empty)
    }

    pub fn bounds(&self) -> Option<(usize, usize)> {
        match self {
            RejuvenationInterval::Empty => None,
            RejuvenationInterval::Interval { i1, i2, .. } => Some((*i1, *i2)),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        match self {
            RejuvenationInterval::Empty => false,
            RejuvenationInterval::Interval { i1, i2, .. } => *i1 <= i && i <= *i2,
        }
    }

    pub fn states(&self) -> Vec<usize> {
        match self.bounds() {
            None => Vec::new(),
            Some((i1, i2)) => (i1..=i2).collect(),
        }
    }
}

fn ceil_snapped(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < LATTICE_SNAP {
        r as i64
    } else {
        x.ceil() as i64
    }
}

fn floor_snapped(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < LATTICE_SNAP {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// Rejuvenation interval of the (m, alpha) family via the roots of
/// f(y) = y - y^(1+alpha) on (0, 1).
///
/// d_i < 0 exactly when y_i = (i+m)/n satisfies f(y_i) > c with
/// c = m / ((1-p) n), so the interval endpoints come from the two roots of
/// f(y) = c, bracketed around the maximizer y* = (1+alpha)^(-1/alpha) and
/// bisected to 1e-12. Endpoints land on the age lattice as
/// i1 = ceil(n y1) - m and i2 = floor(n y2) - m, with roots within 1e-9 of a
/// lattice point snapped onto it. Returns Empty when p = 1 or when the
/// maximum of f stays at or below c.
pub fn rejuvenation_interval(ma: &MAlphaParams) -> RejuvenationInterval {
    let n = ma.n() as f64;
    let alpha = ma.alpha();
    if ma.p() >= 1.0 {
        return RejuvenationInterval::Empty;
    }
    let c = ma.m() as f64 / ((1.0 - ma.p()) * n);
    let ystar = (1.0 + alpha).powf(-1.0 / alpha);
    let f = |y: f64| y - y.powf(1.0 + alpha) - c;
    if f(ystar) <= 0.0 {
        return RejuvenationInterval::Empty;
    }
    let y1 = find_root_bracketed(f, 0.0, ystar, ROOT_TOL)
        .expect("f(0) = -c < 0 < f(y*): bracket holds by construction");
    let y2 = find_root_bracketed(f, ystar, 1.0, ROOT_TOL)
        .expect("f(y*) > 0 > f(1) = -c: bracket holds by construction");
    let m = ma.m() as i64;
    let i1 = (ceil_snapped(n * y1) - m).max(1);
    let i2 = (floor_snapped(n * y2) - m).min(ma.n() as i64 - m - 1);
    if i1 > i2 {
        RejuvenationInterval::Empty
    } else {
        RejuvenationInterval::Interval {
            i1: i1 as usize,
            i2: i2 as usize,
            y1,
            y2,
        }
    }
}
