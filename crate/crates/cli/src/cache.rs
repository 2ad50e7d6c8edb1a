//! Solution cache in `$MODSCHWARZ_CACHE_DIR`, keyed by `(n, a, b, c, bits)`.

use std::path::{Path, PathBuf};

use modschwarz::rug::Float;
use modschwarz::system::{RefinedSolution, SolutionVector};
use modschwarz::ResidueSystem;
use serde::{Deserialize, Serialize};

pub const ENV: &str = "MODSCHWARZ_CACHE_DIR";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub bits: u32,
    pub xs: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub refined_xs: Vec<String>,
    pub refined_residual: f64,
    pub refine_iterations: usize,
}

impl Entry {
    pub fn new(sys: &ResidueSystem, sol: &SolutionVector, refined: &RefinedSolution) -> Self {
        Self {
            n: sys.n,
            a: sys.a,
            b: sys.b,
            c: sys.c,
            bits: refined.bits,
            xs: sol.xs.clone(),
            residual_norm: sol.residual_norm,
            iterations: sol.iterations,
            history: sol.history.clone(),
            refined_xs: refined.xs.iter().map(|x| x.to_string_radix(10, None)).collect(),
            refined_residual: refined.residual_norm,
            refine_iterations: refined.iterations,
        }
    }

    pub fn solution(&self) -> SolutionVector {
        SolutionVector {
            xs: self.xs.clone(),
            residual_norm: self.residual_norm,
            iterations: self.iterations,
            precision: "f64".into(),
            history: self.history.clone(),
        }
    }

    fn refined(&self) -> Option<RefinedSolution> {
        let xs = self
            .refined_xs
            .iter()
            .map(|s| Float::parse(s).ok().map(|p| Float::with_val(self.bits, p)))
            .collect::<Option<Vec<_>>>()?;
        Some(RefinedSolution {
            xs,
            residual_norm: self.refined_residual,
            iterations: self.refine_iterations,
            bits: self.bits,
        })
    }
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn from_env() -> Option<Self> {
        std::env::var_os(ENV).filter(|v| !v.is_empty()).map(|d| Self { dir: d.into() })
    }

    fn path(&self, sys: &ResidueSystem, bits: u32) -> PathBuf {
        self.dir.join(format!("solve-n{}-a{}-b{}-c{}-bits{bits}.json", sys.n, sys.a, sys.b, sys.c))
    }

    /// A stored solution, accepted only if one residual evaluation at the
    /// stored nodes is below `tol`.
    pub fn load(&self, sys: &ResidueSystem, bits: u32, tol: f64) -> Option<(SolutionVector, RefinedSolution)> {
        let text = std::fs::read_to_string(self.path(sys, bits)).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        if (entry.n, entry.a, entry.b, entry.c, entry.bits) != (sys.n, sys.a, sys.b, sys.c, bits) || entry.xs.len() != sys.n {
            return None;
        }
        let refined = entry.refined()?;
        if refined.xs.len() != sys.n || !residual_ok(sys, &refined.xs, tol) || !residual_ok(sys, &entry.xs, tol) {
            return None;
        }
        Some((entry.solution(), refined))
    }

    pub fn store(&self, entry: &Entry, sys: &ResidueSystem) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.path(sys, entry.bits);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(entry)?)?;
        std::fs::rename(tmp, path)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn residual_ok<R: modschwarz::system::real::Real>(sys: &ResidueSystem, xs: &[R], tol: f64) -> bool {
    match sys.residual(xs) {
        Ok(f) => f.iter().all(|v| v.to_f64().abs() < tol),
        Err(_) => false,
    }
}
