//! Dormand-Prince 8(5,3).
//!
//! Coefficients are the published values from Hairer and Wanner's `DOP853`
//! code. The local error estimate combines the fifth and third order
//! embedded differences as `e5^2 / sqrt(e5^2 + 0.01 e3^2)`.

#![allow(clippy::excessive_precision)]

use super::{combine, AdaptiveStepper, StepMethod, StepOutcome};
use crate::error::StepError;
use crate::norm::max_abs;
use crate::system::{OdeSystem, Rhs};
use crate::tableau::ButcherTableau;

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.26001519587677318785587544488e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.41365134159266685502369798665e-1, 0.0, -8.84549479328286085344864962717e-1, 9.24834003261792003115737966543e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.7037037037037037037037037037e-2, 0.0, 0.0, 1.70828608729473871279604482173e-1, 1.25467687566822425016691814123e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.7109375e-2, 0.0, 0.0, 1.70252211019544039314978060272e-1, 6.02165389804559606850219397283e-2, -1.7578125e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.70920001185047927108779319836e-2, 0.0, 0.0, 1.70383925712239993810214054705e-1, 1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2, 8.27378916381402288758473766002e-3, 0.0, 0.0, 0.0, 0.0, 0.0],
    [6.24110958716075717114429577812e-1, 0.0, 0.0, -3.36089262944694129406857109825, -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1, 2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1, 0.0, 0.0, 0.0, 0.0],
    [4.77662536438264365890433908527e-1, 0.0, 0.0, -2.48811461997166764192642586468, -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1, 1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1, -2.03312017085086261358222928593e-2, 0.0, 0.0, 0.0],
    [-9.3714243008598732571704021658e-1, 0.0, 0.0, 5.18637242884406370830023853209, 1.09143734899672957818500254654, -8.14978701074692612513997267357, -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1, 2.49360555267965238987089396762, -3.0467644718982195003823669022, 0.0, 0.0],
    [2.27331014751653820792359768449, 0.0, 0.0, -1.05344954667372501984066689879e1, -2.00087205822486249909675718444, -1.79589318631187989172765950534e1, 2.79488845294199600508499808837e1, -2.85899827713502369474065508674, -8.87285693353062954433549289258, 1.23605671757943030647266201528e1, 6.43392746015763530355970484046e-1, 0.0],
];

/// Eighth-order weights.
const B: [f64; STAGES] = [
    5.42937341165687622380535766363e-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566,
    1.89151789931450038304281599044,
    -5.8012039600105847814672114227,
    3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
];

/// Third-order weights differ from `B` only in stages 1, 9 and 12.
const BHH: [(usize, f64); 3] = [
    (0, 0.244094488188976377952755905512),
    (8, 0.733846688281611857341361741547),
    (11, 0.220588235294117647058823529412e-1),
];

/// Difference between the eighth- and fifth-order solutions, per stage.
const E5: [f64; STAGES] = [
    0.1312004499419488073250102996e-1,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e+1,
    -0.4957589496572501915214079952,
    0.1664377182454986536961530415e+1,
    -0.3503288487499736816886487290,
    0.3341791187130174790297318841,
    0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
];

fn e3_weights() -> [f64; STAGES] {
    let mut e3 = B;
    for (i, bhh) in BHH {
        e3[i] -= bhh;
    }
    e3
}

/// The stage coefficients as a tableau, for consistency checks.
pub fn dop853_tableau() -> ButcherTableau {
    let a = A.iter().flatten().copied().collect();
    ButcherTableau::new(a, B.to_vec(), C.to_vec(), 8, true)
}

/// `eps5^2 / sqrt(eps5^2 + 0.01 eps3^2)`, with `0/0` read as zero.
pub(crate) fn combined_error(eps5: f64, eps3: f64) -> f64 {
    let den = eps5 * eps5 + 0.01 * eps3 * eps3;
    if den == 0.0 {
        0.0
    } else {
        eps5 * eps5 / den.sqrt()
    }
}

/// Stage storage plus the cached slope at the start of the last step.
///
/// A retry from the same `(t, y)`, such as after a rejection, reuses the
/// cached first stage.
#[derive(Debug, Clone, Default)]
pub struct Dop853Workspace {
    k: Vec<Vec<f64>>,
    arg: Vec<f64>,
    err: Vec<f64>,
    first_stage: Option<(f64, Vec<f64>)>,
}

impl Dop853Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn resize(&mut self, d: usize) {
        if self.arg.len() != d {
            self.k = vec![vec![0.0; d]; STAGES];
            self.arg = vec![0.0; d];
            self.err = vec![0.0; d];
            self.first_stage = None;
        }
    }

    fn cache_hit(&self, t: f64, y: &[f64]) -> bool {
        matches!(&self.first_stage, Some((ct, cy)) if *ct == t && cy.as_slice() == y)
    }

    pub fn invalidate(&mut self) {
        self.first_stage = None;
    }
}

/// One DOP853 step of size `h` from `(t, y)`.
///
/// Costs 12 evaluations, or 11 when `ws` already holds `f(t, y)`.
pub fn dop853_step(
    sys: &dyn OdeSystem,
    t: f64,
    y: &[f64],
    h: f64,
    ws: &mut Dop853Workspace,
) -> Result<StepOutcome, StepError> {
    let d = y.len();
    ws.resize(d);
    let mut rhs = Rhs::new(sys, t);

    if !ws.cache_hit(t, y) {
        ws.first_stage = None;
        rhs.eval(0, t, y, &mut ws.k[0])?;
        ws.first_stage = Some((t, y.to_vec()));
    }

    for i in 1..STAGES {
        combine(y, h, &A[i][..i], &ws.k[..i], &mut ws.arg);
        rhs.eval(i, t + C[i] * h, &ws.arg, &mut ws.k[i])?;
    }

    let mut y_next = vec![0.0; d];
    combine(y, h, &B, &ws.k, &mut y_next);

    let zero = vec![0.0; d];
    combine(&zero, h, &E5, &ws.k, &mut ws.err);
    let eps5 = max_abs(&ws.err);
    combine(&zero, h, &e3_weights(), &ws.k, &mut ws.err);
    let eps3 = max_abs(&ws.err);

    Ok(StepOutcome {
        y_next,
        epsilon: combined_error(eps5, eps3),
        rhs_evals: rhs.evals,
    })
}

/// DOP853 stepper. As an [`AdaptiveStepper`] it keeps a workspace between
/// attempts; as a [`StepMethod`] every step is cold.
#[derive(Debug, Clone, Default)]
pub struct Dop853 {
    ws: Dop853Workspace,
}

impl Dop853 {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AdaptiveStepper for Dop853 {
    fn order(&self) -> u32 {
        8
    }

    fn attempt(
        &mut self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError> {
        dop853_step(sys, t, y, h, &mut self.ws)
    }
}

impl StepMethod for Dop853 {
    fn name(&self) -> &'static str {
        "dop853"
    }

    fn order(&self) -> u32 {
        8
    }

    fn step(
        &self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError> {
        dop853_step(sys, t, y, h, &mut Dop853Workspace::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::error_norm;
    use crate::system::FnSystem;
    use crate::systems::HarmonicOscillator;

    #[test]
    fn tableau_is_consistent() {
        let report = dop853_tableau().validate();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(report.max_residual <= 1e-13, "{}", report.max_residual);
    }

    #[test]
    fn embedded_weights_are_consistent() {
        // Both embedded solutions integrate constants exactly: the weight
        // differences must sum to zero.
        assert!(E5.iter().sum::<f64>().abs() < 1e-14);
        assert!(e3_weights().iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn combined_error_limits() {
        assert_eq!(combined_error(3e-7, 0.0), 3e-7);
        assert_eq!(combined_error(0.0, 1e-4), 0.0);
        assert_eq!(combined_error(0.0, 0.0), 0.0);
        let eps = combined_error(1e-6, 1e-4);
        let expected = 1e-12 / (1e-12f64 + 1e-10).sqrt();
        assert!((eps - expected).abs() < 1e-22);
        assert!((eps - 9.9504e-8).abs() < 1e-11);
    }

    #[test]
    fn evaluation_counts() {
        let sys = HarmonicOscillator;
        let mut ws = Dop853Workspace::new();
        let y0 = [0.0, 1.0];
        let cold = dop853_step(&sys, 0.0, &y0, 0.1, &mut ws).unwrap();
        assert_eq!(cold.rhs_evals, 12);
        let retry = dop853_step(&sys, 0.0, &y0, 0.05, &mut ws).unwrap();
        assert_eq!(retry.rhs_evals, 11);
        let next = dop853_step(&sys, 0.05, &retry.y_next, 0.05, &mut ws).unwrap();
        assert_eq!(next.rhs_evals, 12);
    }

    #[test]
    fn cache_does_not_change_results() {
        let sys = HarmonicOscillator;
        let mut ws = Dop853Workspace::new();
        let a = dop853_step(&sys, 0.0, &[0.0, 1.0], 0.3, &mut ws).unwrap();
        let b = dop853_step(&sys, 0.0, &[0.0, 1.0], 0.3, &mut ws).unwrap();
        let c = Dop853::new().step(&sys, 0.0, &[0.0, 1.0], 0.3).unwrap();
        assert_eq!(a.y_next, b.y_next);
        assert_eq!(a.epsilon, b.epsilon);
        assert_eq!(a.y_next, c.y_next);
    }

    #[test]
    fn constant_field_has_zero_error() {
        let sys = FnSystem::new("zero", vec![1.0, 2.0], |_, _, dy| dy.fill(0.0));
        let out = Dop853::new().step(&sys, 0.0, &[1.0, 2.0], 100.0).unwrap();
        assert_eq!(out.y_next, vec![1.0, 2.0]);
        assert_eq!(out.epsilon, 0.0);
    }

    #[test]
    fn one_step_accuracy() {
        let sys = HarmonicOscillator;
        let h: f64 = 0.2;
        let out = Dop853::new().step(&sys, 0.0, &[0.0, 1.0], h).unwrap();
        let err = error_norm(&out.y_next, &[h.sin(), h.cos()]);
        assert!(err < 1e-13, "{err}");
        // the estimate is conservative but of the right size
        assert!(out.epsilon > 0.0 && out.epsilon < 1e-9);
    }

    #[test]
    fn error_estimate_scales_with_step() {
        let sys = HarmonicOscillator;
        let e1 = Dop853::new().step(&sys, 0.0, &[0.0, 1.0], 0.4).unwrap().epsilon;
        let e2 = Dop853::new().step(&sys, 0.0, &[0.0, 1.0], 0.2).unwrap().epsilon;
        let rate = (e1 / e2).log2();
        assert!(rate > 5.0, "estimate rate {rate}");
    }

    #[test]
    fn non_finite_stage_fails() {
        let sys = FnSystem::new("pole", vec![1.0], |_, y, dy| dy[0] = 1.0 / (2.0 - y[0]).max(0.0));
        let err = Dop853::new().step(&sys, 0.0, &[1.0], 10.0).unwrap_err();
        assert!(matches!(err, StepError::NonFinite { .. }));
    }
}
