//! Error norms, observed orders, conservation drift, cached reference
//! solutions and sweep reports.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::field::SpinorField;
use crate::initdata::{prepare_initial_data, G1Variant};
use crate::model::{mass, DiracModel, Potential};
use crate::spectral::{SpaceGrid, TauGrid, C64};
use crate::steppers::{propagate, reconstruct_phi, PredictionVariant, Scheme, StepperOptions};

/// `||phi_1 - psi_1||_inf + ||phi_2 - psi_2||_inf` on the grid.
pub fn linf_error(reference: &SpinorField, numerical: &SpinorField) -> Result<f64> {
    reference.check_same_grid(numerical)?;
    let comp = |c: usize| {
        reference.component(c).iter().zip(numerical.component(c)).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    };
    Ok(comp(0) + comp(1))
}

/// Discrete `L^2` norm of the difference, `(dx sum_j |phi - psi|^2)^(1/2)`.
pub fn l2_error(reference: &SpinorField, numerical: &SpinorField) -> Result<f64> {
    reference.check_same_grid(numerical)?;
    let s: f64 = (0..2)
        .flat_map(|c| reference.component(c).iter().zip(numerical.component(c)).map(|(a, b)| (a - b).norm_sqr()))
        .sum();
    Ok((s * reference.grid().dx()).sqrt())
}

/// Least-squares slope of `log(err)` against `log(dt)`. Nonpositive or
/// non-finite errors are dropped with a warning.
pub fn observed_order(errs: &[f64], dts: &[f64]) -> Result<f64> {
    if errs.len() != dts.len() {
        return invalid(format!("{} errors for {} step sizes", errs.len(), dts.len()));
    }
    if dts.windows(2).any(|w| !(w[1] < w[0])) {
        return invalid("step sizes must be strictly decreasing");
    }
    let pts: Vec<(f64, f64)> = errs
        .iter()
        .zip(dts)
        .filter_map(|(&e, &dt)| {
            if e > 0.0 && e.is_finite() {
                Some((dt.ln(), e.ln()))
            } else {
                warn!("dropping error entry {e} at dt={dt} from the order fit");
                None
            }
        })
        .collect();
    if pts.len() < 2 {
        return invalid("an order fit needs at least two positive errors");
    }
    Ok(ls_slope(&pts))
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Tracks the largest relative deviation of mass and energy from their
/// initial values. Energy is tracked only for static potentials.
#[derive(Clone, Debug)]
pub struct ConservationTracker {
    mass0: f64,
    energy0: Option<f64>,
    pub mass_drift: f64,
    pub energy_drift: Option<f64>,
}

impl ConservationTracker {
    pub fn new(phi0: &SpinorField, m: &DiracModel) -> Result<Self> {
        let energy0 = if m.has_static_potentials() { Some(m.energy(phi0)?) } else { None };
        Ok(Self { mass0: mass(phi0), energy0, mass_drift: 0.0, energy_drift: energy0.map(|_| 0.0) })
    }

    pub fn observe(&mut self, phi: &SpinorField, m: &DiracModel) -> Result<()> {
        self.mass_drift = self.mass_drift.max(((mass(phi) - self.mass0) / self.mass0).abs());
        if let (Some(e0), Some(drift)) = (self.energy0, self.energy_drift.as_mut()) {
            let e = m.energy(phi)?;
            *drift = drift.max(((e - e0) / e0.abs().max(f64::MIN_POSITIVE)).abs());
        }
        Ok(())
    }
}

/// `(mass_drift, energy_drift)` along a sequence of probe fields, the first
/// being the initial state.
pub fn conservation_drift(probes: &[SpinorField], m: &DiracModel) -> Result<(f64, Option<f64>)> {
    let Some(first) = probes.first() else {
        return invalid("conservation drift needs at least one probe");
    };
    let mut tr = ConservationTracker::new(first, m)?;
    for p in &probes[1..] {
        tr.observe(p, m)?;
    }
    Ok((tr.mass_drift, tr.energy_drift))
}

/// Highest preparation order `k <= 5` whose prepared field stays within
/// `1.5 ||Phi_0||_inf`. For small `eps` this is 5; near `eps = 1` the
/// asymptotic corrections are no longer small and lower orders are used.
pub fn perturbative_order(phi0: &SpinorField, m: &DiracModel, tau: TauGrid, g1: G1Variant) -> Result<u32> {
    let bound = 1.5 * phi0.max_norm();
    for k in (1..=5).rev() {
        if prepare_initial_data(phi0, m, tau, k, g1)?.field.max_norm() <= bound {
            return Ok(k);
        }
    }
    Ok(0)
}

/// Resolution of a reference run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub dt: f64,
    pub n_tau: usize,
    /// Fixed preparation order; `None` selects [`perturbative_order`].
    pub order: Option<u32>,
    pub g1: G1Variant,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self { dt: 1e-5, n_tau: 32, order: None, g1: G1Variant::Printed }
    }
}

#[derive(Serialize)]
struct CacheKey<'a> {
    epsilon: f64,
    lambda: f64,
    v_e: &'a Potential,
    v_m: &'a Potential,
    a: f64,
    b: f64,
    n: usize,
    phi0: String,
    t_final: f64,
    spec: &'a ReferenceSpec,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    key_hash: String,
    n: usize,
    key: serde_json::Value,
}

fn field_bytes(phi: &SpinorField) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 * phi.len());
    for c in [phi.component(0), phi.component(1)] {
        for z in c {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn field_from_bytes(grid: SpaceGrid, bytes: &[u8]) -> Option<SpinorField> {
    let n = grid.len();
    if bytes.len() != 32 * n {
        return None;
    }
    let vals: Vec<C64> = bytes
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    SpinorField::from_components(grid, vals[..n].to_vec(), vals[n..].to_vec()).ok()
}

/// Content hash identifying a reference run.
pub fn reference_key(m: &DiracModel, phi0: &SpinorField, t_final: f64, spec: &ReferenceSpec) -> Result<(String, String)> {
    let g = m.grid();
    let key = CacheKey {
        epsilon: m.epsilon(),
        lambda: m.lambda(),
        v_e: m.v_e(),
        v_m: m.v_m(),
        a: g.a(),
        b: g.b(),
        n: g.len(),
        phi0: hex::encode(Sha256::digest(field_bytes(phi0))),
        t_final,
        spec,
    };
    let json = serde_json::to_string(&key).map_err(|e| Error::Serialization(e.to_string()))?;
    Ok((hex::encode(Sha256::digest(json.as_bytes())), json))
}

/// Paths of the binary dump and JSON sidecar for a key hash.
pub fn cache_paths(dir: &Path, hash: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{hash}.bin")), dir.join(format!("{hash}.json")))
}

fn load_cached(dir: &Path, hash: &str, grid: SpaceGrid) -> Option<SpinorField> {
    let (bin, side) = cache_paths(dir, hash);
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(&side).ok()?).ok()?;
    if sidecar.key_hash != hash || sidecar.n != grid.len() {
        warn!("reference cache sidecar {} does not match its key; recomputing", side.display());
        return None;
    }
    let field = field_from_bytes(grid, &fs::read(&bin).ok()?);
    if field.is_none() {
        warn!("reference cache file {} is corrupt; recomputing", bin.display());
    }
    field
}

fn store_cached(dir: &Path, hash: &str, key_json: &str, phi: &SpinorField) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (bin, side) = cache_paths(dir, hash);
    // Write to temporaries and rename, so concurrent readers never see a partial file.
    let tmp_bin = bin.with_extension(format!("bin.{}", std::process::id()));
    fs::File::create(&tmp_bin)?.write_all(&field_bytes(phi))?;
    fs::rename(&tmp_bin, &bin)?;
    let sidecar = Sidecar {
        key_hash: hash.to_string(),
        n: phi.len(),
        key: serde_json::from_str(key_json).map_err(|e| Error::Serialization(e.to_string()))?,
    };
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Serialization(e.to_string()))?;
    let tmp_side = side.with_extension(format!("json.{}", std::process::id()));
    fs::write(&tmp_side, text)?;
    fs::rename(&tmp_side, &side)?;
    Ok(())
}

/// Fine-step UA2 solution `Phi(t_final)`, read from or written to `cache`
/// when a directory is given.
pub fn reference_solution(
    m: &DiracModel,
    phi0: &SpinorField,
    t_final: f64,
    spec: &ReferenceSpec,
    cache: Option<&Path>,
) -> Result<SpinorField> {
    if t_final == 0.0 {
        return Ok(phi0.clone());
    }
    let (hash, json) = reference_key(m, phi0, t_final, spec)?;
    if let Some(dir) = cache {
        if let Some(phi) = load_cached(dir, &hash, *m.grid()) {
            debug!("reference {hash} loaded from cache");
            return Ok(phi);
        }
    }
    let tau = TauGrid::new(spec.n_tau)?;
    let order = match spec.order {
        Some(k) => k,
        None => perturbative_order(phi0, m, tau, spec.g1)?,
    };
    debug!("computing reference eps={} order={order} dt={}", m.epsilon(), spec.dt);
    let opts = StepperOptions { scheme: Scheme::Ua2, dt: spec.dt, n_tau: spec.n_tau, prediction: PredictionVariant::HalfStep };
    let state = propagate(m, phi0, order, spec.g1, &opts, t_final)?;
    let phi = reconstruct_phi(&state, m.epsilon());
    if let Some(dir) = cache {
        store_cached(dir, &hash, &json, &phi)?;
    }
    Ok(phi)
}

/// One completed run of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: Scheme,
    pub init_order: u32,
    pub epsilon: f64,
    pub dt: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Ntau")]
    pub n_tau: usize,
    pub err_linf: f64,
    pub err_l2: f64,
    pub mass_drift: f64,
    pub energy_drift: Option<f64>,
    pub runtime_s: f64,
}

impl ReportRow {
    fn key_cmp(&self, o: &Self) -> Ordering {
        (self.scheme as u8, self.init_order)
            .cmp(&(o.scheme as u8, o.init_order))
            .then(self.epsilon.total_cmp(&o.epsilon))
            .then(self.dt.total_cmp(&o.dt))
            .then((self.n, self.n_tau).cmp(&(o.n, o.n_tau)))
    }
}

/// A run that did not complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub epsilon: f64,
    pub dt: f64,
    pub message: String,
}

pub const CSV_HEADER: [&str; 11] =
    ["scheme", "init_order", "epsilon", "dt", "N", "Ntau", "err_linf", "err_l2", "mass_drift", "energy_drift", "runtime_s"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<FailedRun>,
}

impl ErrorReport {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    /// Sorts rows by `(scheme, init_order, epsilon, dt, N, Ntau)`.
    pub fn sort(&mut self) {
        self.rows.sort_by(ReportRow::key_cmp);
    }

    /// Distinct `eps` values, largest first.
    pub fn epsilons(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.rows.iter().map(|r| r.epsilon).collect();
        e.sort_by(|a, b| b.total_cmp(a));
        e.dedup();
        e
    }

    /// Distinct `dt` values, largest first.
    pub fn dts(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.rows.iter().map(|r| r.dt).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        d.dedup();
        d
    }

    /// `(dt, err_linf)` for one `eps`, largest `dt` first.
    pub fn series(&self, epsilon: f64) -> Vec<(f64, f64)> {
        let mut s: Vec<(f64, f64)> =
            self.rows.iter().filter(|r| r.epsilon == epsilon).map(|r| (r.dt, r.err_linf)).collect();
        s.sort_by(|a, b| b.0.total_cmp(&a.0));
        s
    }

    /// Observed order for each `eps`, largest `eps` first.
    pub fn orders_per_epsilon(&self) -> Vec<(f64, Result<f64>)> {
        self.epsilons()
            .into_iter()
            .map(|e| {
                let (dts, errs): (Vec<f64>, Vec<f64>) = self.series(e).into_iter().unzip();
                (e, observed_order(&errs, &dts))
            })
            .collect()
    }

    /// `max_eps err_linf(eps, dt)` for each `dt`, largest `dt` first.
    pub fn uniform_errors(&self) -> Vec<(f64, f64)> {
        self.dts()
            .into_iter()
            .map(|dt| {
                let worst = self.rows.iter().filter(|r| r.dt == dt).map(|r| r.err_linf).fold(0.0, f64::max);
                (dt, worst)
            })
            .collect()
    }

    pub fn uniform_order(&self) -> Result<f64> {
        let (dts, errs): (Vec<f64>, Vec<f64>) = self.uniform_errors().into_iter().unzip();
        observed_order(&errs, &dts)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut rows = self.rows.clone();
        rows.sort_by(ReportRow::key_cmp);
        let mut wr = csv::Writer::from_writer(w);
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        wr.write_record(CSV_HEADER).map_err(ser)?;
        for r in &rows {
            wr.write_record([
                r.scheme.to_string(),
                r.init_order.to_string(),
                format!("{:e}", r.epsilon),
                format!("{:e}", r.dt),
                r.n.to_string(),
                r.n_tau.to_string(),
                format!("{:e}", r.err_linf),
                format!("{:e}", r.err_l2),
                format!("{:e}", r.mass_drift),
                r.energy_drift.map(|e| format!("{e:e}")).unwrap_or_default(),
                format!("{:.3}", r.runtime_s),
            ])
            .map_err(ser)?;
        }
        wr.flush()?;
        Ok(())
    }
}
