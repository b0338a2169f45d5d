//! Per-η report rows and their fixed CSV layout.

/// One row per η (or per ε for the mollify-and-project baseline).
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub mode: String,
    /// η, or ε for the baseline
    pub scale: f64,
    /// W^{k,p}-proxy distance from the output to the input
    pub error: f64,
    pub err_op: f64,
    pub err_sm: f64,
    pub err_th: f64,
    /// extension and shrinking stage distances (smooth mode)
    pub err_ex: f64,
    pub err_sh: f64,
    /// max sampled dist(·, N) before projection
    pub tube: f64,
    pub max_residual: f64,
    pub bad: usize,
    pub enlarged: usize,
    /// |U + Q_{2ρη}| / η^{kp}
    pub measure_ratio: f64,
    pub c1: f64,
    pub c2: f64,
    /// sup over axis directions v of Σ_j ‖D^j u^op(· + ψ v) − D^j u^op‖_p
    pub translation: f64,
    pub t: f64,
    pub s: f64,
    pub slope: f64,
    pub mu: f64,
    pub tau: f64,
    pub singular_points: usize,
    pub status: String,
}

impl ReportRow {
    pub fn empty(mode: &str, scale: f64) -> Self {
        ReportRow {
            mode: mode.into(),
            scale,
            error: 0.0,
            err_op: 0.0,
            err_sm: 0.0,
            err_th: 0.0,
            err_ex: 0.0,
            err_sh: 0.0,
            tube: 0.0,
            max_residual: 0.0,
            bad: 0,
            enlarged: 0,
            measure_ratio: 0.0,
            c1: 0.0,
            c2: 0.0,
            translation: 0.0,
            t: 0.0,
            s: 0.0,
            slope: 0.0,
            mu: 0.0,
            tau: 0.0,
            singular_points: 0,
            status: "ok".into(),
        }
    }

    pub fn failed(mode: &str, scale: f64, why: &str) -> Self {
        let mut r = Self::empty(mode, scale);
        r.status = format!("failed: {why}");
        r
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub const HEADER: [&'static str; 23] = [
        "mode", "scale", "error", "err_op", "err_sm", "err_th", "err_ex", "err_sh", "tube", "max_residual", "bad",
        "enlarged", "measure_ratio", "c1", "c2", "translation", "t", "s", "slope", "mu", "tau", "singular_points",
        "status",
    ];

    /// Fields in `HEADER` order with fixed float formatting.
    pub fn fields(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.9e}");
        vec![
            self.mode.clone(),
            f(self.scale),
            f(self.error),
            f(self.err_op),
            f(self.err_sm),
            f(self.err_th),
            f(self.err_ex),
            f(self.err_sh),
            f(self.tube),
            f(self.max_residual),
            self.bad.to_string(),
            self.enlarged.to_string(),
            f(self.measure_ratio),
            f(self.c1),
            f(self.c2),
            f(self.translation),
            f(self.t),
            f(self.s),
            f(self.slope),
            f(self.mu),
            f(self.tau),
            self.singular_points.to_string(),
            self.status.clone(),
        ]
    }

    pub fn finite(&self) -> bool {
        [
            self.scale, self.error, self.err_op, self.err_sm, self.err_th, self.err_ex, self.err_sh, self.tube,
            self.max_residual, self.measure_ratio, self.c1, self.c2, self.translation, self.t, self.s, self.slope,
            self.mu, self.tau,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineReport {
    /// sorted by decreasing scale
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
}

impl PipelineReport {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
        self.rows.sort_by(|a, b| b.scale.total_cmp(&a.scale));
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(ReportRow::ok)
    }
}

/// Whether the sequence decreases strictly.
pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}
