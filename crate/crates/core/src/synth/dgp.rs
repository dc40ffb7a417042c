//! Gravity DGP with selection and a planted corporate-control network.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::rng::SeedRng;
use super::SynthError;
use crate::econ::design::evaluate_term;
use crate::econ::fit::INTERCEPT;
use crate::econ::spec::{LogPolicy, Term, Var};
use crate::measures::{measure_table, MeasureOptions, MeasureTable};
use crate::netcore::{build_networks, DyadPanel, DyadRecord, WeightedDigraph};

const EARTH_RADIUS_KM: f64 = 6371.0;
const MIN_DIST_KM: f64 = 10.0;
const CONTIG_KM: f64 = 800.0;
const HUB_SHARE: f64 = 0.05;
/// Link-count multiplier for the strong origin->hub and hub->dest links.
const STRONG_FACTOR: f64 = 7.389_056_098_930_65; // e^2
/// Log-normal sd of the strong link counts, so that conduit paths differ
/// in length.
const STRONG_DISPERSION: f64 = 1.0;
/// Loadings of the country size score on link presence and link counts.
const SIZE_ON_PRESENCE: f64 = 0.5;
const SIZE_ON_COUNT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeModel {
    /// `ln trade = X beta + sigma eps` on selected dyads.
    #[default]
    Lognormal,
    /// `trade ~ Poisson(exp(X beta))` on selected dyads.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DGPConfig {
    pub n_countries: usize,
    /// Outcome coefficients keyed by term name (`_cons` for the intercept).
    pub beta: BTreeMap<String, f64>,
    /// Selection coefficients keyed by term name.
    pub gamma: BTreeMap<String, f64>,
    pub rho: f64,
    pub sigma: f64,
    pub cc_density: f64,
    pub cc_dispersion: f64,
    /// Typical link count on an existing control edge.
    pub cc_mean: f64,
    pub conduit_fraction: f64,
    pub outcome: OutcomeModel,
    pub seed: u64,
}

/// Baseline structural coefficients (gravity terms plus the two network
/// measures).
pub fn baseline_beta() -> BTreeMap<String, f64> {
    [
        (INTERCEPT, -13.667),
        ("ln_cc", 0.103),
        ("ln_spl", -0.203),
        ("ln_gdp_o", 0.924),
        ("ln_gdp_d", 0.809),
        ("ln_pop_o", 1.047),
        ("ln_pop_d", 0.861),
        ("ln_dist", -1.543),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn baseline_gamma() -> BTreeMap<String, f64> {
    [(INTERCEPT, 3.479), ("ln_dist", -0.384)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

impl Default for DGPConfig {
    fn default() -> Self {
        Self {
            n_countries: 60,
            beta: baseline_beta(),
            gamma: baseline_gamma(),
            rho: 0.5,
            sigma: 1.0,
            cc_density: 0.9,
            cc_dispersion: 0.1,
            cc_mean: 20.0,
            conduit_fraction: 0.0,
            outcome: OutcomeModel::Lognormal,
            seed: 1,
        }
    }
}

fn parse_terms(map: &BTreeMap<String, f64>, what: &str) -> Result<Vec<(Option<Term>, f64)>, SynthError> {
    map.iter()
        .map(|(name, &v)| {
            if !v.is_finite() {
                return Err(SynthError::ConfigInvalid(format!("{what} `{name}` is not finite")));
            }
            if name == INTERCEPT {
                return Ok((None, v));
            }
            let t = Term::parse(name).map_err(|e| SynthError::ConfigInvalid(format!("{what} `{name}`: {e}")))?;
            if t.vars().iter().any(|v| **v == Var::Trade) {
                return Err(SynthError::ConfigInvalid(format!("{what} term `{name}` cannot use trade")));
            }
            Ok((Some(t), v))
        })
        .collect()
}

impl DGPConfig {
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let c: DGPConfig = toml::from_str(text).map_err(|e| SynthError::ConfigInvalid(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::ConfigInvalid(m));
        if self.n_countries < 3 {
            return bad(format!("n_countries must be >= 3, got {}", self.n_countries));
        }
        if self.n_countries > 26 * 26 * 26 {
            return bad(format!("n_countries must be <= 17576, got {}", self.n_countries));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be > 0, got {}", self.sigma));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (-1, 1), got {}", self.rho));
        }
        if !(self.cc_density > 0.0 && self.cc_density <= 1.0) {
            return bad(format!("cc_density must lie in (0, 1], got {}", self.cc_density));
        }
        if !(self.cc_dispersion >= 0.0 && self.cc_dispersion.is_finite()) {
            return bad(format!("cc_dispersion must be >= 0, got {}", self.cc_dispersion));
        }
        if !(self.cc_mean >= 1.0 && self.cc_mean.is_finite()) {
            return bad(format!("cc_mean must be >= 1, got {}", self.cc_mean));
        }
        if !(self.conduit_fraction >= 0.0 && self.conduit_fraction < 1.0) {
            return bad(format!("conduit_fraction must lie in [0, 1), got {}", self.conduit_fraction));
        }
        parse_terms(&self.beta, "beta")?;
        parse_terms(&self.gamma, "gamma")?;
        Ok(())
    }
}

/// The realised parameters and latent draws behind a generated panel.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta: BTreeMap<String, f64>,
    pub gamma: BTreeMap<String, f64>,
    pub rho: f64,
    pub sigma: f64,
    pub seed: u64,
    pub hubs: Vec<String>,
    /// Ordered dyads, in panel row order.
    pub dyads: Vec<(String, String)>,
    /// Selection error per dyad.
    pub u: Vec<f64>,
    /// Outcome error per dyad (standardised; the outcome uses `sigma * eps`).
    pub eps: Vec<f64>,
}

pub fn country_code(k: usize) -> String {
    let letters = [k / 676 % 26, k / 26 % 26, k % 26];
    letters.iter().map(|&l| (b'A' + l as u8) as char).collect()
}

fn great_circle(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = a;
    let (lat2, lon2) = b;
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Country {
    ln_gdp: f64,
    ln_pop: f64,
    coord: (f64, f64),
    asean_china: bool,
}

/// Index score (`sum coef * term`) per panel row; `None` where a term is
/// undefined (unreachable pair).
fn linear_index(panel: &DyadPanel, measures: &MeasureTable, terms: &[(Option<Term>, f64)]) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = vec![Some(0.0); panel.len()];
    for (t, coef) in terms {
        match t {
            None => out.iter_mut().flatten().for_each(|v| *v += coef),
            Some(t) => {
                let vals = evaluate_term(panel, measures, t, LogPolicy::Shift1);
                for (o, v) in out.iter_mut().zip(vals) {
                    *o = match (*o, v) {
                        (Some(a), Some(b)) => Some(a + coef * b),
                        _ => None,
                    };
                }
            }
        }
    }
    out
}

/// Plants the control network. Returns it with the hub indices.
fn plant_network(cfg: &DGPConfig, countries: &[Country], rng: &mut SeedRng) -> (Vec<f64>, Vec<usize>) {
    let n = countries.len();
    let score: Vec<f64> = countries.iter().map(|c| c.ln_gdp - 6f64.ln()).collect();
    let base_logit = if cfg.cc_density >= 1.0 {
        f64::INFINITY
    } else {
        (cfg.cc_density / (1.0 - cfg.cc_density)).ln()
    };
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = logistic(base_logit + SIZE_ON_PRESENCE * (score[i] + score[j]));
            let present = rng.bernoulli(p);
            let z = rng.normal();
            if present {
                let count = cfg.cc_mean * (cfg.cc_dispersion * z + SIZE_ON_COUNT * (score[i] + score[j])).exp();
                w[i * n + j] = count.round().max(1.0);
            }
        }
    }
    let n_hubs = ((HUB_SHARE * n as f64).ceil() as usize).max(1);
    let mut degree: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let d = (0..n).filter(|&j| w[i * n + j] > 0.0).count() + (0..n).filter(|&j| w[j * n + i] > 0.0).count();
            (i, d)
        })
        .collect();
    degree.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut hubs: Vec<usize> = degree.iter().take(n_hubs).map(|d| d.0).collect();
    hubs.sort_unstable();

    if cfg.conduit_fraction > 0.0 {
        for i in 0..n {
            for j in 0..n {
                if i == j || hubs.contains(&i) || hubs.contains(&j) {
                    continue;
                }
                if !rng.bernoulli(cfg.conduit_fraction) {
                    continue;
                }
                let h = hubs[rng.below(hubs.len())];
                let strong = (cfg.cc_mean * STRONG_FACTOR * (STRONG_DISPERSION * rng.normal()).exp()).round().max(1.0);
                w[i * n + h] = w[i * n + h].max(strong);
                w[h * n + j] = w[h * n + j].max(strong);
                w[i * n + j] = if rng.bernoulli(0.5) { 1.0 } else { 0.0 };
            }
        }
    }
    (w, hubs)
}

pub fn generate(cfg: &DGPConfig) -> Result<(DyadPanel, GroundTruth), SynthError> {
    cfg.validate()?;
    let beta_terms = parse_terms(&cfg.beta, "beta")?;
    let gamma_terms = parse_terms(&cfg.gamma, "gamma")?;
    let n = cfg.n_countries;
    let mut rng = SeedRng::new(cfg.seed);

    let countries: Vec<Country> = (0..n)
        .map(|_| {
            let ln_gdp = 6f64.ln() + rng.normal();
            let ln_pop = 16.0 + 1.6 * rng.normal();
            let lat = (2.0 * rng.uniform() - 1.0).asin();
            let lon = 2.0 * std::f64::consts::PI * rng.uniform() - std::f64::consts::PI;
            let asean_china = rng.bernoulli(0.1);
            Country {
                ln_gdp,
                ln_pop,
                coord: (lat, lon),
                asean_china,
            }
        })
        .collect();
    let codes: Vec<String> = (0..n).map(country_code).collect();

    // symmetric pair attributes, drawn over i < j
    let mut dist = vec![0.0; n * n];
    let mut dummies = vec![[0u8; 5]; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = great_circle(countries[i].coord, countries[j].coord).max(MIN_DIST_KM);
            let attrs = [
                u8::from(d < CONTIG_KM),
                u8::from(rng.bernoulli(0.02)),
                u8::from(rng.bernoulli(0.01)),
                u8::from(rng.bernoulli(0.1)),
                u8::from(rng.bernoulli(0.2)),
            ];
            dist[i * n + j] = d;
            dist[j * n + i] = d;
            dummies[i * n + j] = attrs;
            dummies[j * n + i] = attrs;
        }
    }

    let (cc, hubs) = plant_network(cfg, &countries, &mut rng);

    let mut rows = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let [contig, colony, smctry, comlang, rta] = dummies[i * n + j];
            rows.push(DyadRecord {
                origin: codes[i].clone(),
                dest: codes[j].clone(),
                trade: 0.0,
                cc: cc[i * n + j],
                gdp_o: countries[i].ln_gdp.exp(),
                gdp_d: countries[j].ln_gdp.exp(),
                pop_o: countries[i].ln_pop.exp(),
                pop_d: countries[j].ln_pop.exp(),
                dist: dist[i * n + j],
                contig,
                colony,
                smctry,
                comlang,
                rta,
                asean_china_o: u8::from(countries[i].asean_china),
                sector: None,
            });
        }
    }
    let draft = DyadPanel::new(rows).map_err(SynthError::Panel)?;
    let (_, control) = build_networks(&draft).map_err(SynthError::Panel)?;
    let measures = measure_table(&control, MeasureOptions::default()).map_err(SynthError::Measures)?;
    let xb = linear_index(&draft, &measures, &beta_terms);
    let zg = linear_index(&draft, &measures, &gamma_terms);

    let s = (1.0 - cfg.rho * cfg.rho).sqrt();
    let mut rows = draft.rows().to_vec();
    let mut u = Vec::with_capacity(rows.len());
    let mut eps = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter_mut().enumerate() {
        let z1 = rng.normal();
        let z2 = rng.normal();
        let (uk, ek) = (z1, cfg.rho * z1 + s * z2);
        u.push(uk);
        eps.push(ek);
        let (Some(xb), Some(zg)) = (xb[k], zg[k]) else {
            continue;
        };
        if zg + uk <= 0.0 {
            continue;
        }
        r.trade = match cfg.outcome {
            OutcomeModel::Lognormal => (xb + cfg.sigma * ek).exp(),
            OutcomeModel::Poisson => rng.poisson(xb.exp()) as f64,
        };
    }
    let panel = DyadPanel::new(rows).map_err(SynthError::Panel)?;
    let truth = GroundTruth {
        beta: cfg.beta.clone(),
        gamma: cfg.gamma.clone(),
        rho: cfg.rho,
        sigma: cfg.sigma,
        seed: cfg.seed,
        hubs: hubs.iter().map(|&h| codes[h].clone()).collect(),
        dyads: panel.rows().iter().map(|r| (r.origin.clone(), r.dest.clone())).collect(),
        u,
        eps,
    };
    Ok((panel, truth))
}

/// Control network of a generated panel (convenience for callers that only
/// need the graph).
pub fn control_network(panel: &DyadPanel) -> Result<WeightedDigraph, SynthError> {
    Ok(build_networks(panel).map_err(SynthError::Panel)?.1)
}

/// `kind,name,origin,dest,value` rows.
pub fn write_truth<W: Write>(truth: &GroundTruth, writer: W) -> Result<(), SynthError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "name", "origin", "dest", "value"])?;
    for (k, v) in &truth.beta {
        w.write_record(["beta", k, "", "", &v.to_string()])?;
    }
    for (k, v) in &truth.gamma {
        w.write_record(["gamma", k, "", "", &v.to_string()])?;
    }
    w.write_record(["param", "rho", "", "", &truth.rho.to_string()])?;
    w.write_record(["param", "sigma", "", "", &truth.sigma.to_string()])?;
    w.write_record(["param", "seed", "", "", &truth.seed.to_string()])?;
    for h in &truth.hubs {
        w.write_record(["hub", h, "", "", ""])?;
    }
    for (k, (o, d)) in truth.dyads.iter().enumerate() {
        w.write_record(["u", "", o, d, &truth.u[k].to_string()])?;
        w.write_record(["eps", "", o, d, &truth.eps[k].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(reader: R) -> Result<GroundTruth, SynthError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut t = GroundTruth {
        beta: BTreeMap::new(),
        gamma: BTreeMap::new(),
        rho: f64::NAN,
        sigma: f64::NAN,
        seed: 0,
        hubs: vec![],
        dyads: vec![],
        u: vec![],
        eps: vec![],
    };
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| SynthError::Truth(format!("row {}: bad number `{s}`", row + 1)))
        };
        match field(0) {
            "beta" => {
                t.beta.insert(field(1).into(), num(field(4))?);
            }
            "gamma" => {
                t.gamma.insert(field(1).into(), num(field(4))?);
            }
            "param" => match field(1) {
                "rho" => t.rho = num(field(4))?,
                "sigma" => t.sigma = num(field(4))?,
                "seed" => {
                    t.seed = field(4)
                        .parse()
                        .map_err(|_| SynthError::Truth(format!("row {}: bad seed", row + 1)))?
                }
                other => return Err(SynthError::Truth(format!("row {}: unknown param `{other}`", row + 1))),
            },
            "hub" => t.hubs.push(field(1).into()),
            "u" => {
                t.dyads.push((field(2).into(), field(3).into()));
                t.u.push(num(field(4))?);
            }
            "eps" => t.eps.push(num(field(4))?),
            other => return Err(SynthError::Truth(format!("row {}: unknown kind `{other}`", row + 1))),
        }
    }
    if t.u.len() != t.eps.len() {
        return Err(SynthError::Truth("u and eps rows do not pair up".into()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{indirect_share, shortest_paths};
    use crate::netcore::write_panel;

    fn small(seed: u64) -> DGPConfig {
        DGPConfig {
            n_countries: 25,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn codes() {
        assert_eq!(country_code(0), "AAA");
        assert_eq!(country_code(1), "AAB");
        assert_eq!(country_code(27), "ABB");
    }

    #[test]
    fn deterministic_per_seed() {
        let (a, ta) = generate(&small(3)).unwrap();
        let (b, tb) = generate(&small(3)).unwrap();
        let (c, _) = generate(&small(4)).unwrap();
        let bytes = |p: &DyadPanel| {
            let mut v = Vec::new();
            write_panel(p, &mut v).unwrap();
            v
        };
        assert_eq!(bytes(&a), bytes(&b));
        assert_eq!(ta, tb);
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn truth_round_trips() {
        let (_, t) = generate(&small(5)).unwrap();
        let mut buf = Vec::new();
        write_truth(&t, &mut buf).unwrap();
        assert_eq!(read_truth(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn geography_is_symmetric_and_positive() {
        let (p, _) = generate(&small(6)).unwrap();
        assert!(p.rows().iter().all(|r| r.dist >= MIN_DIST_KM));
        assert!(p.rows().iter().any(|r| r.trade == 0.0));
        assert!(p.rows().iter().any(|r| r.trade > 0.0));
    }

    #[test]
    fn conduits_raise_indirect_share() {
        let share = |f: f64| {
            let cfg = DGPConfig {
                conduit_fraction: f,
                ..small(8)
            };
            let (p, t) = generate(&cfg).unwrap();
            assert_eq!(t.hubs.len(), 2);
            let c = control_network(&p).unwrap();
            indirect_share(&shortest_paths(&c, 1.0).unwrap()).unwrap()
        };
        let low = share(0.0);
        let high = share(0.8);
        assert!(low < 0.2, "{low}");
        assert!(high > 0.6, "{high}");
    }

    #[test]
    fn config_validation() {
        let bad = DGPConfig {
            n_countries: 2,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(SynthError::ConfigInvalid(_))));
        let bad = DGPConfig {
            rho: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let mut bad = DGPConfig::default();
        bad.beta.insert("ln_trade".into(), 1.0);
        assert!(bad.validate().is_err());
        let parsed = DGPConfig::from_toml(&DGPConfig::default().to_toml()).unwrap();
        assert_eq!(parsed, DGPConfig::default());
        assert!(DGPConfig::from_toml("n_countries = 10\nbogus = 1\n").is_err());
    }
}
