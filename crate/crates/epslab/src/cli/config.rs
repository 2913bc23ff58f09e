//! Key-value run configuration.
//!
//! Plain text, one `key = value` per line, `#` comments. Unknown or
//! duplicated keys are rejected with the offending line number so a typo
//! never silently falls back to a default.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result as LabResult;
use crate::field::{Bc, Grid, GridSpec};
use crate::problem::{Nonlinearity, PotentialSpec};
use crate::solver::SolveMode;

/// A parse or validation failure, with the 1-based line when one line is
/// at fault (0 for file-level problems such as missing keys).
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "{}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

/// Everything a run needs, straight from the file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dims: usize,
    pub n: usize,
    pub length: f64,
    pub bc: Bc,
    pub a2: f64,
    pub potential: String,
    pub b2: Option<f64>,
    pub omega: Option<f64>,
    pub radial_coeff: Option<f64>,
    pub nonlinearity: String,
    pub f_value: Option<f64>,
    pub exponent: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
    pub mode: String,
    pub radius: Option<f64>,
    pub eps: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub xi: [f64; 3],
    pub q2_potential: Option<String>,
    pub q2_b2: Option<f64>,
    pub q2_omega: Option<f64>,
    pub q2_radial_coeff: Option<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "dims",
    "n",
    "length",
    "bc",
    "a2",
    "potential",
    "b2",
    "omega",
    "radial_coeff",
    "nonlinearity",
    "f_value",
    "exponent",
    "coeffs",
    "mode",
    "radius",
    "eps",
    "tol",
    "max_iter",
    "xi",
    "q2_potential",
    "q2_b2",
    "q2_omega",
    "q2_radial_coeff",
];

struct Raw {
    entries: HashMap<String, (usize, String)>,
}

impl Raw {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn required_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        match self.take(key) {
            Some((line, v)) => parse_f64(line, key, &v),
            None => err(0, format!("missing required key `{key}`")),
        }
    }

    fn required_usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        match self.take(key) {
            Some((line, v)) => v
                .parse::<usize>()
                .map_err(|_| ConfigError {
                    line,
                    message: format!("`{key}` must be a nonnegative integer, got `{v}`"),
                }),
            None => err(0, format!("missing required key `{key}`")),
        }
    }

    fn required_str(&mut self, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError {
                line: 0,
                message: format!("missing required key `{key}`"),
            })
    }

    fn optional_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            Some((line, v)) => parse_f64(line, key, &v).map(Some),
            None => Ok(None),
        }
    }

    fn optional_usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError {
                    line,
                    message: format!("`{key}` must be a nonnegative integer, got `{v}`"),
                }),
            None => Ok(None),
        }
    }

    fn optional_list(&mut self, key: &str) -> Result<Option<(usize, Vec<f64>)>, ConfigError> {
        match self.take(key) {
            Some((line, v)) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    out.push(parse_f64(line, key, part.trim())?);
                }
                Ok(Some((line, out)))
            }
            None => Ok(None),
        }
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(line, format!("`{key}` must be a finite real, got `{v}`")),
    }
}

impl RunConfig {
    /// Parses the text of a config file.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: HashMap<String, (usize, String)> = HashMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(line_no, format!("expected `key = value`, got `{line}`"));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return err(line_no, format!("unknown key `{key}`"));
            }
            if value.is_empty() {
                return err(line_no, format!("empty value for `{key}`"));
            }
            if let Some((prev_line, _)) = entries.get(&key) {
                return err(
                    line_no,
                    format!("duplicate key `{key}` (first set on line {prev_line})"),
                );
            }
            entries.insert(key, (line_no, value));
        }
        let mut raw = Raw { entries };

        let dims = raw.required_usize("dims")?;
        let n = raw.required_usize("n")?;
        let length = raw.required_f64("length")?;
        let (bc_line, bc_str) = raw.required_str("bc")?;
        let bc = match bc_str.as_str() {
            "periodic" => Bc::Periodic,
            "dirichlet" => Bc::Dirichlet,
            other => return err(bc_line, format!("`bc` must be periodic or dirichlet, got `{other}`")),
        };
        let a2 = raw.required_f64("a2")?;
        let (pot_line, potential) = raw.required_str("potential")?;
        if !["constant", "shifted-sine", "radial-quadratic"].contains(&potential.as_str()) {
            return err(
                pot_line,
                format!("`potential` must be constant, shifted-sine or radial-quadratic, got `{potential}`"),
            );
        }
        let (nl_line, nonlinearity) = raw.required_str("nonlinearity")?;
        if !["constant", "power-shift", "exp", "polynomial"].contains(&nonlinearity.as_str()) {
            return err(
                nl_line,
                format!("`nonlinearity` must be constant, power-shift, exp or polynomial, got `{nonlinearity}`"),
            );
        }
        let mode = match raw.take("mode") {
            Some((line, v)) => {
                if !["eps-split", "eps-full", "limit", "rescaled"].contains(&v.as_str()) {
                    return err(
                        line,
                        format!("`mode` must be eps-split, eps-full, limit or rescaled, got `{v}`"),
                    );
                }
                v
            }
            None => "eps-split".to_string(),
        };
        let eps = match raw.optional_list("eps")? {
            Some((line, list)) => {
                if list.is_empty() || list.iter().any(|&e| e < 0.0) {
                    return err(line, "`eps` must be one or more nonnegative reals");
                }
                list
            }
            None => return err(0, "missing required key `eps`"),
        };
        let xi = match raw.optional_list("xi")? {
            Some((line, list)) => {
                if list.len() > 3 {
                    return err(line, "`xi` takes at most three components");
                }
                let mut out = [0.0; 3];
                out[..list.len()].copy_from_slice(&list);
                out
            }
            None => [0.0; 3],
        };
        let coeffs = raw.optional_list("coeffs")?.map(|(_, v)| v);

        let q2_potential = match raw.take("q2_potential") {
            Some((line, v)) => {
                if !["constant", "shifted-sine", "radial-quadratic"].contains(&v.as_str()) {
                    return err(line, format!("`q2_potential` must be constant, shifted-sine or radial-quadratic, got `{v}`"));
                }
                Some(v)
            }
            None => None,
        };

        let cfg = RunConfig {
            dims,
            n,
            length,
            bc,
            a2,
            potential,
            b2: raw.optional_f64("b2")?,
            omega: raw.optional_f64("omega")?,
            radial_coeff: raw.optional_f64("radial_coeff")?,
            nonlinearity,
            f_value: raw.optional_f64("f_value")?,
            exponent: raw.optional_f64("exponent")?,
            coeffs,
            mode,
            radius: raw.optional_f64("radius")?,
            eps,
            tol: raw.optional_f64("tol")?.unwrap_or(1e-10),
            max_iter: raw.optional_usize("max_iter")?.unwrap_or(500),
            xi,
            q2_potential,
            q2_b2: raw.optional_f64("q2_b2")?,
            q2_omega: raw.optional_f64("q2_omega")?,
            q2_radial_coeff: raw.optional_f64("q2_radial_coeff")?,
        };
        Ok(cfg)
    }

    pub fn build_grid(&self) -> LabResult<Arc<Grid>> {
        Grid::build(GridSpec::new(self.dims, self.n, self.length, self.bc))
    }

    fn build_potential_from(
        &self,
        family: &str,
        b2: Option<f64>,
        omega: Option<f64>,
        radial_coeff: Option<f64>,
    ) -> LabResult<PotentialSpec> {
        match family {
            "constant" => PotentialSpec::constant(self.a2, b2.unwrap_or(self.a2)),
            "shifted-sine" => PotentialSpec::shifted_sine(
                self.a2,
                omega.unwrap_or(2.0 * PI / self.length),
            ),
            "radial-quadratic" => {
                PotentialSpec::radial_quadratic(self.a2, radial_coeff.unwrap_or(1.0))
            }
            other => unreachable!("validated family `{other}`"),
        }
    }

    pub fn build_potential(&self) -> LabResult<PotentialSpec> {
        self.build_potential_from(&self.potential, self.b2, self.omega, self.radial_coeff)
    }

    /// Second potential for ordering comparisons; defaults to the
    /// constant floor `q = a2`.
    pub fn build_q2(&self) -> LabResult<PotentialSpec> {
        match &self.q2_potential {
            Some(family) => self.build_potential_from(
                family,
                self.q2_b2,
                self.q2_omega,
                self.q2_radial_coeff,
            ),
            None => PotentialSpec::constant(self.a2, self.a2),
        }
    }

    pub fn build_nonlinearity(&self) -> LabResult<Nonlinearity> {
        match self.nonlinearity.as_str() {
            "constant" => Ok(Nonlinearity::Constant {
                c: self.f_value.unwrap_or(1.0),
            }),
            "power-shift" => Nonlinearity::power_shift(self.exponent.unwrap_or(2.0)),
            "exp" => Ok(Nonlinearity::Exponential),
            "polynomial" => Nonlinearity::polynomial(self.coeffs.clone().unwrap_or_default()),
            other => unreachable!("validated family `{other}`"),
        }
    }

    pub fn solve_mode(&self) -> SolveMode {
        match self.mode.as_str() {
            "eps-split" => SolveMode::EpsSplit,
            "eps-full" => SolveMode::EpsFull,
            "limit" => SolveMode::Limit,
            "rescaled" => SolveMode::Rescaled { xi: self.xi },
            other => unreachable!("validated mode `{other}`"),
        }
    }

    pub fn first_eps(&self) -> f64 {
        self.eps[0]
    }
}
