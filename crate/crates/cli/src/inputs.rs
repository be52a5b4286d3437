use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use photonic_fusion::channel::{ChiJson, DephasingFunction, ProcessMatrix};
use photonic_fusion::quantum::state::DensityJson;
use photonic_fusion::quantum::{bell_phi_plus, bell_psi_minus, Pol, PureState, TwoQubitState};
use photonic_fusion::tomography::{ingest_counts, CountTable};

use crate::args::{ChannelArgs, StateArgs};

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Named input states: a two-letter product label, `phi+`, `psi-`, `mixed`
/// or `werner:<p>`.
pub fn parse_state_label(label: &str) -> Result<TwoQubitState> {
    let l = label.trim();
    match l {
        "phi+" => return Ok(bell_phi_plus().density()),
        "psi-" => return Ok(bell_psi_minus().density()),
        "mixed" => return Ok(TwoQubitState::maximally_mixed()),
        _ => {}
    }
    if let Some(p) = l.strip_prefix("werner:") {
        let p: f64 = p.parse().with_context(|| format!("Werner weight in {l:?}"))?;
        return Ok(TwoQubitState::werner(p)?);
    }
    let chars: Vec<char> = l.chars().collect();
    if chars.len() == 2 {
        let a: Pol = chars[0].to_string().parse()?;
        let b: Pol = chars[1].to_string().parse()?;
        return Ok(PureState::product(a, b).density());
    }
    bail!("unknown input state {l:?} (expected e.g. PP, HV, phi+, psi-, mixed, werner:0.8)")
}

impl StateArgs {
    pub fn fill_defaults(&mut self) {
        if self.rho_file.is_none() {
            self.input.get_or_insert_with(|| "PP".into());
        }
    }

    pub fn resolve(&self) -> Result<TwoQubitState> {
        match (&self.rho_file, &self.input) {
            (Some(path), _) => {
                let json: DensityJson = read_json(path)?;
                TwoQubitState::new(json.to_matrix()?).with_context(|| format!("state in {}", path.display()))
            }
            (None, Some(label)) => parse_state_label(label),
            (None, None) => parse_state_label("PP"),
        }
    }
}

/// Fusion χ plus the dephasing value that follows it.
pub struct ResolvedChannel {
    pub chi: ProcessMatrix,
    pub f_model: Option<DephasingFunction>,
    pub f_value: f64,
}

impl ChannelArgs {
    pub fn fill_defaults(&mut self) {
        if self.chi_file.is_none() {
            self.chi.get_or_insert_with(|| vec![1.0, 0.0, 0.0, 0.0]);
        }
        if self.f.is_none() && self.delta_tau.is_some() {
            self.sigma_t.get_or_insert(1.0);
        }
    }

    pub fn chi(&self) -> Result<(ProcessMatrix, Option<DephasingFunction>)> {
        if let Some(path) = &self.chi_file {
            let doc: ChiJson = read_json(path)?;
            let chi = doc.to_chi().with_context(|| format!("chi in {}", path.display()))?;
            return Ok((chi, doc.f_model));
        }
        let d = self.chi.clone().unwrap_or_else(|| vec![1.0, 0.0, 0.0, 0.0]);
        ensure!(d.len() == 4, "--chi needs four values 00,zz,xy,xx, got {}", d.len());
        Ok((ProcessMatrix::new([d[0], d[1], d[2], d[3]])?, None))
    }

    /// Dephasing model used for delays: `--sigma-t` wins over a model read
    /// from the chi file.
    pub fn dephasing_model(&self, from_file: Option<DephasingFunction>) -> Result<DephasingFunction> {
        match (self.sigma_t, from_file) {
            (Some(s), _) => Ok(DephasingFunction::gaussian(s)?),
            (None, Some(m)) => Ok(m),
            (None, None) => Ok(DephasingFunction::default()),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedChannel> {
        let (chi, file_model) = self.chi()?;
        let (f_value, f_model) = match (self.f, self.delta_tau) {
            (Some(f), _) => (f, None),
            (None, Some(dt)) => {
                let m = self.dephasing_model(file_model)?;
                (m.value(dt), Some(m))
            }
            (None, None) => match file_model {
                Some(DephasingFunction::Constant { value }) => (value, file_model),
                other => (1.0, other),
            },
        };
        ensure!((0.0..=1.0).contains(&f_value), "dephasing value {f_value} outside [0, 1]");
        Ok(ResolvedChannel { chi, f_model, f_value })
    }
}

/// Reads and merges count files. Rows repeated within or across files are
/// summed, with a warning naming the file.
pub fn read_count_files(paths: &[impl AsRef<Path>]) -> Result<(CountTable, Vec<String>)> {
    if paths.is_empty() {
        return Err(anyhow!("no count files given (use --counts)"));
    }
    let mut table = CountTable::new();
    let mut warnings = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let ingested = ingest_counts(file).with_context(|| format!("reading counts from {}", path.display()))?;
        warnings.extend(ingested.warnings.into_iter().map(|w| format!("{}: {w}", path.display())));
        for (prep, proj, e) in ingested.table.iter() {
            if table.insert(prep, proj, e.value, e.duration_s) {
                warnings.push(format!(
                    "{}: row {}{}->{}{} also present in an earlier file, summed",
                    path.display(),
                    prep.0,
                    prep.1,
                    proj.0,
                    proj.1
                ));
            }
        }
    }
    Ok((table, warnings))
}
