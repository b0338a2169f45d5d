//! Flat `key = value` run configuration and its validation.

use crate::error::{Error, Result};
use crate::field::ExampleKind;
use crate::manifold::TargetManifold;

/// Either a fixed value or the automatic rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Auto {
    Auto,
    Value(f64),
}

impl Auto {
    fn text(&self) -> String {
        match self {
            Auto::Auto => "auto".into(),
            Auto::Value(v) => v.to_string(),
        }
    }
}

/// Which density construction a run performs when kp < m.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// R-class output with singularities on the dual skeleton
    Nontrivial,
    /// extension and shrinking on top of the R-class output
    Smooth,
}

impl Mode {
    fn text(&self) -> &'static str {
        match self {
            Mode::Nontrivial => "nontrivial",
            Mode::Smooth => "smooth",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub m: usize,
    pub k: usize,
    pub p: f64,
    pub target: String,
    pub input: String,
    pub degree: i32,
    pub gamma: f64,
    pub rho: f64,
    pub rho_lo: f64,
    pub mu: f64,
    pub tau: Auto,
    pub kappa: f64,
    pub s: Auto,
    /// sorted decreasing
    pub etas: Vec<f64>,
    /// mollification radii of the mollify-and-project baseline
    pub eps: Vec<f64>,
    pub resolution: usize,
    /// translation candidates per normal axis in the opening
    pub candidates: usize,
    pub seed: u64,
    pub iota: Option<f64>,
    pub c_prime: f64,
    pub score_opening: bool,
    /// sample points for the fitted R-class constants
    pub samples: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Nontrivial,
            m: 2,
            k: 1,
            p: 1.5,
            target: "s1".into(),
            input: "hedgehog".into(),
            degree: 1,
            gamma: 0.5,
            rho: 0.2,
            rho_lo: 0.1,
            mu: 0.2,
            tau: Auto::Auto,
            kappa: 0.5,
            s: Auto::Auto,
            etas: vec![0.25, 0.125],
            eps: vec![0.1, 0.05, 0.025],
            resolution: 128,
            candidates: 2,
            seed: 0,
            iota: None,
            c_prime: 1.0,
            score_opening: true,
            samples: 1000,
        }
    }
}

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("line {line}: {key} = {v:?} is not a number")))
}

fn parse_usize(key: &str, v: &str, line: usize) -> Result<usize> {
    v.parse::<usize>().map_err(|_| Error::Config(format!("line {line}: {key} = {v:?} is not a nonnegative integer")))
}

fn parse_bool(key: &str, v: &str, line: usize) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("line {line}: {key} = {v:?} is not a boolean"))),
    }
}

fn parse_auto(key: &str, v: &str, line: usize) -> Result<Auto> {
    if v == "auto" {
        Ok(Auto::Auto)
    } else {
        parse_f64(key, v, line).map(Auto::Value)
    }
}

fn parse_list(key: &str, v: &str, line: usize) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(key, s.trim(), line)).collect()
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl PipelineConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected key = value, got {body:?}")))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "mode" => {
                    c.mode = match v {
                        "nontrivial" => Mode::Nontrivial,
                        "smooth" => Mode::Smooth,
                        _ => return Err(Error::Config(format!("line {line}: mode = {v:?}; expected nontrivial or smooth"))),
                    }
                }
                "m" => c.m = parse_usize(key, v, line)?,
                "k" => c.k = parse_usize(key, v, line)?,
                "p" => c.p = parse_f64(key, v, line)?,
                "target" => c.target = v.to_string(),
                "input" => c.input = v.to_string(),
                "degree" => {
                    c.degree = v.parse().map_err(|_| Error::Config(format!("line {line}: degree = {v:?} is not an integer")))?
                }
                "gamma" => c.gamma = parse_f64(key, v, line)?,
                "rho" => c.rho = parse_f64(key, v, line)?,
                "rho_lo" => c.rho_lo = parse_f64(key, v, line)?,
                "mu" => c.mu = parse_f64(key, v, line)?,
                "tau" => c.tau = parse_auto(key, v, line)?,
                "kappa" => c.kappa = parse_f64(key, v, line)?,
                "s" => c.s = parse_auto(key, v, line)?,
                "eta" => c.etas = parse_list(key, v, line)?,
                "eps" => c.eps = parse_list(key, v, line)?,
                "resolution" => c.resolution = parse_usize(key, v, line)?,
                "candidates" => c.candidates = parse_usize(key, v, line)?,
                "seed" => {
                    c.seed = v.parse().map_err(|_| Error::Config(format!("line {line}: seed = {v:?} is not an integer")))?
                }
                "iota" => c.iota = if v == "auto" { None } else { Some(parse_f64(key, v, line)?) },
                "c_prime" => c.c_prime = parse_f64(key, v, line)?,
                "score_opening" => c.score_opening = parse_bool(key, v, line)?,
                "samples" => c.samples = parse_usize(key, v, line)?,
                _ => return Err(Error::Config(format!("line {line}: unknown key {key:?}"))),
            }
        }
        c.etas.sort_by(|a, b| b.total_cmp(a));
        c.eps.sort_by(|a, b| b.total_cmp(a));
        c.validate()?;
        Ok(c)
    }

    /// Text that parses back to the same configuration.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("mode = {}", self.mode.text()),
            format!("m = {}", self.m),
            format!("k = {}", self.k),
            format!("p = {}", self.p),
            format!("target = {}", self.target),
            format!("input = {}", self.input),
            format!("degree = {}", self.degree),
            format!("gamma = {}", self.gamma),
            format!("rho = {}", self.rho),
            format!("rho_lo = {}", self.rho_lo),
            format!("mu = {}", self.mu),
            format!("tau = {}", self.tau.text()),
            format!("kappa = {}", self.kappa),
            format!("s = {}", self.s.text()),
            format!("eta = {}", list_text(&self.etas)),
            format!("eps = {}", list_text(&self.eps)),
            format!("resolution = {}", self.resolution),
            format!("candidates = {}", self.candidates),
            format!("seed = {}", self.seed),
            format!("iota = {}", self.iota.map_or("auto".to_string(), |v| v.to_string())),
            format!("c_prime = {}", self.c_prime),
            format!("score_opening = {}", self.score_opening),
            format!("samples = {}", self.samples),
        ];
        lines.push(String::new());
        lines.join("\n")
    }

    /// ℓ = ⌊kp⌋.
    pub fn ell(&self) -> usize {
        (self.k as f64 * self.p).floor() as usize
    }

    pub fn kp(&self) -> f64 {
        self.k as f64 * self.p
    }

    pub fn target_manifold(&self) -> Result<TargetManifold> {
        let mut t = TargetManifold::by_name(&self.target)?;
        if let Some(i) = self.iota {
            t.iota = i;
        }
        Ok(t)
    }

    /// Half-width 1 + γ of the cubed domain.
    pub fn domain_half_width(&self) -> f64 {
        1.0 + self.gamma
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |rule: &str, detail: String| Err(Error::Config(format!("violates \"{rule}\": {detail}")));
        if self.m == 0 || self.m > crate::jet::MAX_DIM {
            return bad("1 <= m <= 4", format!("m = {}", self.m));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return bad("1 <= p < inf", format!("p = {}", self.p));
        }
        if self.k == 0 || self.k > 2 {
            return bad("1 <= k <= 2", format!("k = {}", self.k));
        }
        if !(0.0 < self.rho_lo && self.rho_lo < self.rho) {
            return bad("0 < ρ̲ < ρ", format!("rho_lo = {}, rho = {}", self.rho_lo, self.rho));
        }
        if !(self.rho < 0.5) {
            return bad("0 < ρ < 1/2", format!("rho = {}", self.rho));
        }
        if !(0.0 < self.mu && self.mu < 0.5) {
            return bad("0 < μ < 1/2", format!("mu = {}", self.mu));
        }
        if let Auto::Value(t) = self.tau {
            if !(0.0 < t && t < 0.5) {
                return bad("0 < τ < 1/2", format!("tau = {t}"));
            }
        }
        if !(0.0 < self.kappa && self.kappa < 1.0) {
            return bad("0 < κ < 1", format!("kappa = {}", self.kappa));
        }
        if let Auto::Value(s) = self.s {
            if !(s > 0.0) {
                return bad("0 < s < t", format!("s = {s}"));
            }
        }
        if !(self.gamma > 0.0) {
            return bad("γ > 0", format!("gamma = {}", self.gamma));
        }
        if self.etas.is_empty() {
            return Err(Error::Config("eta list is empty".into()));
        }
        let hw = self.domain_half_width();
        for &eta in &self.etas {
            if 2.0 * self.rho * eta > self.gamma + 1e-12 {
                return bad("2ρη ≤ γ", format!("rho = {}, eta = {eta}, gamma = {}", self.rho, self.gamma));
            }
            if !(eta > 0.0 && eta <= self.gamma) {
                return bad("0 < η ≤ γ", format!("eta = {eta}, gamma = {}", self.gamma));
            }
            let r = hw / eta;
            if (r - r.round()).abs() > 1e-9 * r {
                return bad("η divides 1 + γ", format!("eta = {eta}, 1 + gamma = {hw}"));
            }
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e <= self.gamma)) {
            return bad("0 < ε ≤ γ", format!("eps = {:?}", self.eps));
        }
        if self.resolution < 4 {
            return bad("resolution >= 4", format!("resolution = {}", self.resolution));
        }
        let grid = crate::field::GridSpec::cube(1, 1.0, self.resolution, true);
        for &eta in &self.etas {
            for i in 0..grid.n(0) {
                // lattice coordinate of the node; odd integers are cell centers
                let c = (grid.coord(0, i) + hw) / eta;
                if (c - c.round()).abs() < 1e-9 && (c.round() as i64).rem_euclid(2) == 1 {
                    return bad(
                        "measurement nodes avoid cell centers",
                        format!("resolution = {} puts a node at {} for eta = {eta}", self.resolution, grid.coord(0, i)),
                    );
                }
            }
        }
        if self.candidates == 0 {
            return bad("candidates >= 1", "candidates = 0".into());
        }
        if let Some(i) = self.iota {
            if !(i > 0.0) {
                return bad("ι > 0", format!("iota = {i}"));
            }
        }
        if !(self.c_prime > 0.0) {
            return bad("C′ > 0", format!("c_prime = {}", self.c_prime));
        }
        self.target_manifold()?;
        ExampleKind::by_name(&self.input)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_parses() {
        let c = PipelineConfig::parse("m = 2\nk = 1\np = 1.5\ntarget = s1\neta = 0.25, 0.125\n").unwrap();
        assert_eq!(c.etas, vec![0.25, 0.125]);
        assert_eq!(c.ell(), 1);
        assert_eq!(PipelineConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn violations_name_the_rule() {
        let e = PipelineConfig::parse("rho_lo = 0.3\nrho = 0.2").unwrap_err().to_string();
        assert!(e.contains("0 < ρ̲ < ρ"), "{e}");
        let e = PipelineConfig::parse("gamma = 0.5\neta = 1.5").unwrap_err().to_string();
        assert!(e.contains("2ρη ≤ γ"), "{e}");
        let e = PipelineConfig::parse("m 2").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = PipelineConfig::parse("# comment\nfoo = 1").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("foo"), "{e}");
        let e = PipelineConfig::parse("eta = 0.0625\nresolution = 48").unwrap_err().to_string();
        assert!(e.contains("avoid cell centers"), "{e}");
        assert!(PipelineConfig::parse("eta = 0.0625\nresolution = 40").is_ok());
    }
}
