//! Country registry, dyad-panel ingestion and the two country-level networks
//! (trade and corporate control) built from it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is empty")]
    EmptyFile(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: cannot parse column `{column}` value {value:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: empty country code")]
    EmptyCode { row: usize },
    #[error("row {row}: self-pair {code}->{code}")]
    SelfPair { row: usize, code: String },
    #[error("row {row}: duplicate dyad {origin}->{dest} (sector {sector:?})")]
    DuplicateDyad {
        row: usize,
        origin: String,
        dest: String,
        sector: Option<String>,
    },
    #[error("row {row}: column `{column}` is negative ({value})")]
    NegativeValue { row: usize, column: String, value: f64 },
    #[error("row {row}: column `{column}` must be {expected} (got {value})")]
    InvalidValue {
        row: usize,
        column: String,
        expected: &'static str,
        value: f64,
    },
    #[error("row {row}: `{column}` for {origin}-{dest} disagrees with an earlier row ({first} vs {second})")]
    AsymmetricSymmetricCovariate {
        row: usize,
        column: String,
        origin: String,
        dest: String,
        first: f64,
        second: f64,
    },
    #[error("row {row}: `cc` for {origin}->{dest} differs across sector rows ({first} vs {second})")]
    InconsistentControl {
        row: usize,
        origin: String,
        dest: String,
        first: f64,
        second: f64,
    },
    #[error("panel has no rows")]
    EmptyPanel,
    #[error("graph has fewer than two countries")]
    TooFewCountries,
    #[error("both graphs have no positive edges")]
    EmptyGraph,
    #[error("graphs are defined over different registries")]
    RegistryMismatch,
    #[error("top-edge fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
}

pub type Result<T> = std::result::Result<T, NetError>;

/// Ordered, deduplicated set of country codes with a dense index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryRegistry {
    codes: Vec<String>,
    index: HashMap<String, usize>,
}

impl CountryRegistry {
    /// Builds a registry from arbitrary codes: codes are trimmed,
    /// uppercased, deduplicated and sorted.
    pub fn from_codes<I, S>(codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = codes
            .into_iter()
            .map(|c| normalize_code(c.as_ref()))
            .filter(|c| !c.is_empty())
            .collect();
        let codes: Vec<String> = set.into_iter().collect();
        let index = codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Self { codes, index }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> &str {
        &self.codes[i]
    }

    /// Looks up a code; the argument is normalized first.
    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index.get(&normalize_code(code)).copied()
    }
}

pub fn normalize_code(code: &str) -> String {
    code.trim().to_ascii_uppercase()
}

/// Dense nonnegative adjacency over a registry with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    registry: CountryRegistry,
    weights: Vec<f64>,
}

impl WeightedDigraph {
    pub fn zeros(registry: CountryRegistry) -> Self {
        let n = registry.len();
        Self {
            registry,
            weights: vec![0.0; n * n],
        }
    }

    /// Builds a graph from a row-major matrix. Negative or non-finite
    /// weights are rejected and the diagonal is forced to zero.
    pub fn from_dense(registry: CountryRegistry, weights: Vec<f64>) -> Option<Self> {
        let n = registry.len();
        if weights.len() != n * n || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return None;
        }
        let mut g = Self { registry, weights };
        for i in 0..n {
            g.weights[i * n + i] = 0.0;
        }
        Some(g)
    }

    /// Convenience constructor over synthetic codes `N0`, `N1`, ...
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        let registry = CountryRegistry::from_codes((0..n).map(|i| format!("N{i:04}")));
        Self::from_dense(registry, rows.concat())
    }

    pub fn registry(&self) -> &CountryRegistry {
        &self.registry
    }

    pub fn n(&self) -> usize {
        self.registry.len()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n() + j]
    }

    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) {
        assert!(w.is_finite() && w >= 0.0, "edge weights must be finite and nonnegative");
        if i != j {
            let n = self.n();
            self.weights[i * n + j] = w;
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) > 0.0
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                weights[j * n + i] = self.weights[i * n + j];
            }
        }
        Self {
            registry: self.registry.clone(),
            weights,
        }
    }

    /// Column sums: total inflow to each node.
    pub fn in_strength(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|j| (0..n).map(|i| self.weight(i, j)).sum())
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// One ordered-dyad row of the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadRecord {
    pub origin: String,
    pub dest: String,
    /// Thousands of current USD.
    pub trade: f64,
    /// Corporate-control link count.
    pub cc: f64,
    pub gdp_o: f64,
    pub gdp_d: f64,
    pub pop_o: f64,
    pub pop_d: f64,
    /// Kilometres, strictly positive.
    pub dist: f64,
    pub contig: u8,
    pub colony: u8,
    pub smctry: u8,
    pub comlang: u8,
    pub rta: u8,
    pub asean_china_o: u8,
    pub sector: Option<String>,
}

impl DyadRecord {
    fn symmetric_covariates(&self) -> [(&'static str, f64); 6] {
        [
            ("dist", self.dist),
            ("contig", self.contig as f64),
            ("colony", self.colony as f64),
            ("smctry", self.smctry as f64),
            ("comlang", self.comlang as f64),
            ("rta", self.rta as f64),
        ]
    }
}

/// Validated long-format panel of ordered dyads.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadPanel {
    rows: Vec<DyadRecord>,
}

impl DyadPanel {
    /// Validates rows against the panel invariants. Row numbers in errors
    /// are 1-based data rows (the header is row 0).
    pub fn new(mut rows: Vec<DyadRecord>) -> Result<Self> {
        let mut seen: BTreeSet<(String, String, Option<String>)> = BTreeSet::new();
        let mut sym: HashMap<(String, String), (usize, [(&'static str, f64); 6])> = HashMap::new();
        let mut control: HashMap<(String, String), f64> = HashMap::new();
        for (k, r) in rows.iter_mut().enumerate() {
            let row = k + 1;
            r.origin = normalize_code(&r.origin);
            r.dest = normalize_code(&r.dest);
            if r.origin.is_empty() || r.dest.is_empty() {
                return Err(NetError::EmptyCode { row });
            }
            if r.origin == r.dest {
                return Err(NetError::SelfPair {
                    row,
                    code: r.origin.clone(),
                });
            }
            for (column, value) in [
                ("trade", r.trade),
                ("cc", r.cc),
                ("gdp_o", r.gdp_o),
                ("gdp_d", r.gdp_d),
                ("pop_o", r.pop_o),
                ("pop_d", r.pop_d),
                ("dist", r.dist),
            ] {
                if !value.is_finite() {
                    return Err(NetError::InvalidValue {
                        row,
                        column: column.into(),
                        expected: "finite",
                        value,
                    });
                }
                if value < 0.0 {
                    return Err(NetError::NegativeValue {
                        row,
                        column: column.into(),
                        value,
                    });
                }
            }
            if r.dist <= 0.0 {
                return Err(NetError::InvalidValue {
                    row,
                    column: "dist".into(),
                    expected: "> 0",
                    value: r.dist,
                });
            }
            for (column, v) in [
                ("contig", r.contig),
                ("colony", r.colony),
                ("smctry", r.smctry),
                ("comlang", r.comlang),
                ("rta", r.rta),
                ("asean_china_o", r.asean_china_o),
            ] {
                if v > 1 {
                    return Err(NetError::InvalidValue {
                        row,
                        column: column.into(),
                        expected: "0 or 1",
                        value: v as f64,
                    });
                }
            }
            if !seen.insert((r.origin.clone(), r.dest.clone(), r.sector.clone())) {
                return Err(NetError::DuplicateDyad {
                    row,
                    origin: r.origin.clone(),
                    dest: r.dest.clone(),
                    sector: r.sector.clone(),
                });
            }
            let key = if r.origin < r.dest {
                (r.origin.clone(), r.dest.clone())
            } else {
                (r.dest.clone(), r.origin.clone())
            };
            let cov = r.symmetric_covariates();
            match sym.get(&key) {
                Some((_, first)) => {
                    for ((column, a), (_, b)) in first.iter().zip(cov.iter()) {
                        if a != b {
                            return Err(NetError::AsymmetricSymmetricCovariate {
                                row,
                                column: (*column).into(),
                                origin: r.origin.clone(),
                                dest: r.dest.clone(),
                                first: *a,
                                second: *b,
                            });
                        }
                    }
                }
                None => {
                    sym.insert(key, (row, cov));
                }
            }
            let directed = (r.origin.clone(), r.dest.clone());
            match control.get(&directed) {
                Some(&first) if first != r.cc => {
                    return Err(NetError::InconsistentControl {
                        row,
                        origin: r.origin.clone(),
                        dest: r.dest.clone(),
                        first,
                        second: r.cc,
                    })
                }
                Some(_) => {}
                None => {
                    control.insert(directed, r.cc);
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[DyadRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted union of all origin and destination codes.
    pub fn registry(&self) -> CountryRegistry {
        CountryRegistry::from_codes(
            self.rows
                .iter()
                .flat_map(|r| [r.origin.as_str(), r.dest.as_str()]),
        )
    }
}

/// Maps the canonical column names to the names used in a particular file.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    names: BTreeMap<&'static str, String>,
}

pub const REQUIRED_COLUMNS: [&str; 15] = [
    "origin",
    "dest",
    "trade",
    "cc",
    "gdp_o",
    "gdp_d",
    "pop_o",
    "pop_d",
    "dist",
    "contig",
    "colony",
    "smctry",
    "comlang",
    "rta",
    "asean_china_o",
];

impl Default for ColumnMap {
    fn default() -> Self {
        let names = REQUIRED_COLUMNS
            .iter()
            .chain(std::iter::once(&"sector"))
            .map(|c| (*c, c.to_string()))
            .collect();
        Self { names }
    }
}

impl ColumnMap {
    /// Overrides the file column used for a canonical column.
    pub fn rename(mut self, canonical: &str, in_file: impl Into<String>) -> Self {
        if let Some(k) = REQUIRED_COLUMNS
            .iter()
            .chain(std::iter::once(&"sector"))
            .find(|c| **c == canonical)
        {
            self.names.insert(k, in_file.into());
        }
        self
    }

    fn get(&self, canonical: &str) -> &str {
        &self.names[canonical]
    }
}

pub fn load_panel(path: impl AsRef<Path>, schema: &ColumnMap) -> Result<DyadPanel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| NetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(NetError::EmptyFile(path.display().to_string()));
    }
    read_panel(bytes.as_slice(), schema)
}

pub fn read_panel<R: Read>(reader: R, schema: &ColumnMap) -> Result<DyadPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |canonical: &str| headers.iter().position(|h| h == schema.get(canonical));
    let mut cols = HashMap::new();
    for c in REQUIRED_COLUMNS {
        let p = position(c).ok_or_else(|| NetError::MissingColumn(schema.get(c).to_string()))?;
        cols.insert(c, p);
    }
    let sector_col = position("sector");

    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let text = |c: &str| rec.get(cols[c]).unwrap_or("");
        let num = |c: &'static str| -> Result<f64> {
            let v = text(c);
            v.parse::<f64>().map_err(|_| NetError::Parse {
                row,
                column: c.into(),
                value: v.into(),
            })
        };
        let dummy = |c: &'static str| -> Result<u8> {
            let v = num(c)?;
            if v == 0.0 || v == 1.0 {
                Ok(v as u8)
            } else {
                Err(NetError::InvalidValue {
                    row,
                    column: c.into(),
                    expected: "0 or 1",
                    value: v,
                })
            }
        };
        let sector = sector_col
            .and_then(|p| rec.get(p))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        rows.push(DyadRecord {
            origin: text("origin").to_string(),
            dest: text("dest").to_string(),
            trade: num("trade")?,
            cc: num("cc")?,
            gdp_o: num("gdp_o")?,
            gdp_d: num("gdp_d")?,
            pop_o: num("pop_o")?,
            pop_d: num("pop_d")?,
            dist: num("dist")?,
            contig: dummy("contig")?,
            colony: dummy("colony")?,
            smctry: dummy("smctry")?,
            comlang: dummy("comlang")?,
            rta: dummy("rta")?,
            asean_china_o: dummy("asean_china_o")?,
            sector,
        });
    }
    if rows.is_empty() {
        return Err(NetError::EmptyPanel);
    }
    DyadPanel::new(rows)
}

/// Writes the panel in the canonical column order. Floats use the shortest
/// representation that round-trips, so `read_panel(write_panel(p)) == p`.
pub fn write_panel<W: Write>(panel: &DyadPanel, writer: W) -> Result<()> {
    let with_sector = panel.rows.iter().any(|r| r.sector.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    if with_sector {
        header.push("sector");
    }
    w.write_record(&header)?;
    for r in &panel.rows {
        let mut rec = vec![
            r.origin.clone(),
            r.dest.clone(),
            r.trade.to_string(),
            r.cc.to_string(),
            r.gdp_o.to_string(),
            r.gdp_d.to_string(),
            r.pop_o.to_string(),
            r.pop_d.to_string(),
            r.dist.to_string(),
            r.contig.to_string(),
            r.colony.to_string(),
            r.smctry.to_string(),
            r.comlang.to_string(),
            r.rta.to_string(),
            r.asean_china_o.to_string(),
        ];
        if with_sector {
            rec.push(r.sector.clone().unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| NetError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

/// Trade matrix `T` and control matrix `C` over the registry of all codes
/// in the panel. Sector rows are summed into `T`; `C` is dyad-level.
pub fn build_networks(panel: &DyadPanel) -> Result<(WeightedDigraph, WeightedDigraph)> {
    if panel.is_empty() {
        return Err(NetError::EmptyPanel);
    }
    let registry = panel.registry();
    if registry.len() < 2 {
        return Err(NetError::TooFewCountries);
    }
    let mut trade = WeightedDigraph::zeros(registry.clone());
    let mut control = WeightedDigraph::zeros(registry);
    for r in panel.rows() {
        let i = trade.registry().index_of(&r.origin).expect("origin in registry");
        let j = trade.registry().index_of(&r.dest).expect("dest in registry");
        let t = trade.weight(i, j) + r.trade;
        trade.set_weight(i, j, t);
        control.set_weight(i, j, r.cc);
    }
    Ok((trade, control))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    TradeOnly,
    ControlOnly,
    Both,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::TradeOnly => "trade_only",
            EdgeKind::ControlOnly => "control_only",
            EdgeKind::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeClass {
    pub origin: String,
    pub dest: String,
    pub class: EdgeKind,
    pub trade_weight: f64,
    pub control_weight: f64,
}

/// Indices of the top `ceil(q * m)` positive edges, ordered by
/// (weight desc, origin code asc, dest code asc).
fn top_edges(g: &WeightedDigraph, q: f64) -> Vec<(usize, usize)> {
    let n = g.n();
    let reg = g.registry();
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| g.has_edge(i, j))
        .collect();
    edges.sort_by(|&(a, b), &(c, d)| {
        g.weight(c, d)
            .total_cmp(&g.weight(a, b))
            .then_with(|| reg.code(a).cmp(reg.code(c)))
            .then_with(|| reg.code(b).cmp(reg.code(d)))
    });
    let m = edges.len();
    // q*m can land a hair above an integer (0.025 * 80 = 2.0000000000000004)
    let take = ((q * m as f64) * (1.0 - 1e-12)).ceil() as usize;
    edges.truncate(take.min(m));
    edges
}

pub fn classify_top_edges(
    trade: &WeightedDigraph,
    control: &WeightedDigraph,
    q: f64,
) -> Result<Vec<EdgeClass>> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(NetError::InvalidFraction(q));
    }
    if trade.registry() != control.registry() {
        return Err(NetError::RegistryMismatch);
    }
    if trade.edge_count() == 0 && control.edge_count() == 0 {
        return Err(NetError::EmptyGraph);
    }
    let top_t: BTreeSet<(usize, usize)> = top_edges(trade, q).into_iter().collect();
    let top_c: BTreeSet<(usize, usize)> = top_edges(control, q).into_iter().collect();
    let reg = trade.registry();
    // indices follow sorted code order, so the union is already in (origin, dest) code order
    Ok(top_t
        .union(&top_c)
        .map(|&(i, j)| {
            let class = match (top_t.contains(&(i, j)), top_c.contains(&(i, j))) {
                (true, true) => EdgeKind::Both,
                (true, false) => EdgeKind::TradeOnly,
                _ => EdgeKind::ControlOnly,
            };
            EdgeClass {
                origin: reg.code(i).to_string(),
                dest: reg.code(j).to_string(),
                class,
                trade_weight: trade.weight(i, j),
                control_weight: control.weight(i, j),
            }
        })
        .collect())
}

pub fn write_edge_classes<W: Write>(edges: &[EdgeClass], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["origin", "dest", "class", "trade_weight", "control_weight"])?;
    for e in edges {
        w.write_record([
            e.origin.as_str(),
            e.dest.as_str(),
            e.class.as_str(),
            &e.trade_weight.to_string(),
            &e.control_weight.to_string(),
        ])?;
    }
    w.flush().map_err(|source| NetError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
