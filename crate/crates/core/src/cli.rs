//! Batch driver: subcommands, JSON run reports and exit codes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arc_algebra::{check_soundness, AlgBasis, Algebra, ArcDiagram};
use crate::bimodules::{
    build_module, dd_half_identity, identity_da, identity_law_failures, tabulate, tabulate_da,
    verify_aa, verify_da, verify_dd, AaModule, DaModule, DdModule, DiagramAa, TableAa, TableDa,
    Verdict,
};
use crate::box_tensor::{aa_box_da, dd_box_aa};
use crate::diagram::{dual_diagram, identity_diagram, Diagram};
use crate::error::{Error, Result};
use crate::polygons::{all_queries, oracle_census, oracle_count, PeelCounter, PolygonQuery};
use crate::reduction::{
    homology_blocks, isomorphic_da, isomorphic_reduced, reduce, reduce_da, IsoVerdict,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "bhf",
    version,
    about = "Bordered Floer bimodules of surface mapping classes over F2"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Options {
    /// Largest total chord length of any input sequence.
    #[arg(long, global = true, default_value_t = 6)]
    pub max_chords: usize,
    /// Largest number of faces in a counted polygon.
    #[arg(long, global = true, default_value_t = 8)]
    pub max_area: u32,
    /// Largest number of δ¹ iterates or DA blocks in one box evaluation.
    #[arg(long, global = true, default_value_t = 32)]
    pub box_cap: usize,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a diagram file against every structural rule.
    Validate { path: PathBuf },
    /// Describe the chord algebra of an arc diagram and check associativity.
    Algebra { path: PathBuf },
    /// List the generators of a diagram with their idempotents.
    Generators { path: PathBuf },
    /// Count polygons for one query, or compare the two counters on all queries.
    Count {
        path: PathBuf,
        /// Starting generator id.
        #[arg(long)]
        x: Option<String>,
        /// Ending generator id.
        #[arg(long)]
        y: Option<String>,
        /// σ chord, repeated, in polygon order starting next to x.
        #[arg(long = "sigma")]
        sigmas: Vec<String>,
        /// ρ chord, repeated, in order.
        #[arg(long = "rho")]
        rhos: Vec<String>,
    },
    /// Build M(φ) from a diagram and check its A∞ relations.
    Module {
        path: PathBuf,
        /// Write the bimodule dump here instead of into the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the structure equations of a dumped AA, DA or DD bimodule.
    Verify { path: PathBuf },
    /// Form DD ⊠ M(ψ), and M(φ) ⊠ (DD ⊠ M(ψ)) when --left is given.
    Box {
        /// Diagram or AA dump for M(ψ).
        right: PathBuf,
        /// Diagram or AA dump for M(φ).
        #[arg(long)]
        left: Option<PathBuf>,
        /// DD dump to use instead of the half identity.
        #[arg(long)]
        dd: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce an AA bimodule (diagram or dump) to a minimal model.
    Reduce {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the minimal models of two AA bimodules.
    Compare { a: PathBuf, b: PathBuf },
    /// Reduce DD(I/2) ⊠ M(I) and compare it with the identity DA bimodule.
    IdentityCheck {
        /// Arc diagram, or any diagram over it.
        path: PathBuf,
        /// DD dump to use instead of the half identity.
        #[arg(long)]
        dd: Option<PathBuf>,
    },
    /// Compare M(φ) ⊠ (DD ⊠ M(ψ)) with M(ψ∘φ) after reduction.
    ComposeCheck {
        dphi: PathBuf,
        dpsi: PathBuf,
        dcomp: PathBuf,
    },
    /// Check whether the homology block matrix of M(φ) is the identity.
    FaithfulCheck { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictEntry {
    pub check: String,
    pub status: Status,
    pub detail: Value,
}

/// Everything in a report except the wall time; the digest covers exactly this.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ReportBody {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub verdicts: Vec<VerdictEntry>,
    pub witnesses: Vec<String>,
    pub truncated: bool,
    pub truncation: Vec<String>,
    pub error: Option<String>,
    pub output: serde_json::Map<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub body: ReportBody,
    pub exit_code: i32,
    pub digest: String,
    pub wall_time_ms: u128,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct Run {
    opts: Options,
    body: ReportBody,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.body.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes)
            .map_err(|_| Error::Malformed(format!("{} is not UTF-8", path.display())))
    }

    fn verdict(&mut self, check: &str, status: Status, detail: Value) {
        self.body.verdicts.push(VerdictEntry {
            check: check.into(),
            status,
            detail,
        });
    }

    fn pass_if(&mut self, check: &str, ok: bool, detail: Value) {
        self.verdict(check, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    fn relation(&mut self, check: &str, v: &Verdict) {
        if let Some(w) = &v.witness {
            self.body.witnesses.push(w.clone());
        }
        self.pass_if(
            check,
            v.pass,
            json!({"bound": v.bound, "checked": v.checked, "witness": v.witness}),
        );
    }

    fn iso(&mut self, check: &str, v: &IsoVerdict) {
        let status = match v {
            IsoVerdict::Yes { .. } => Status::Pass,
            IsoVerdict::No { reason } => {
                self.body.witnesses.push(reason.clone());
                Status::Fail
            }
            IsoVerdict::Inconclusive { .. } => Status::Inconclusive,
        };
        let mut detail = serde_json::to_value(v).expect("verdict serializes");
        detail["criterion"] =
            json!("isomorphic minimal models up to the bound: sufficient for equivalence");
        self.verdict(check, status, detail);
    }

    fn put(&mut self, key: &str, v: Value) {
        self.body.output.insert(key.into(), v);
    }

    fn emit(&mut self, key: &str, dump: String, out: Option<&Path>) -> Result<()> {
        match out {
            Some(p) => {
                std::fs::write(p, dump).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                self.put(key, json!({"written_to": p.display().to_string()}));
            }
            None => {
                let v: Value = serde_json::from_str(&dump)?;
                self.put(key, v);
            }
        }
        Ok(())
    }

    fn diagram(&mut self, path: &Path) -> Result<Diagram> {
        self.read(path)?;
        Diagram::load_valid(path)
    }

    fn arc(&mut self, path: &Path) -> Result<ArcDiagram> {
        let text = self.read(path)?;
        let v: Value = serde_json::from_str(&text)?;
        if v.get("arc_diagram").is_some() {
            Ok(Diagram::load(path)?.rho_algebra().diagram().clone())
        } else {
            ArcDiagram::from_json(&text)
        }
    }

    /// A diagram (counted lazily) or a tabulated AA dump.
    fn aa_source(&mut self, path: &Path) -> Result<AaSource> {
        let text = self.read(path)?;
        let v: Value = serde_json::from_str(&text)?;
        if v.get("type").and_then(Value::as_str) == Some("AA") {
            Ok(AaSource::Table(Box::new(TableAa::from_json(&text)?)))
        } else {
            Ok(AaSource::Diagram(Box::new(Diagram::load_valid(path)?)))
        }
    }

    fn aa_table(&mut self, path: &Path) -> Result<TableAa> {
        match self.aa_source(path)? {
            AaSource::Table(t) => Ok(*t),
            AaSource::Diagram(d) => build_module(&d, self.opts.max_chords, self.opts.max_area),
        }
    }

    fn dd(&mut self, path: Option<&Path>, z: &ArcDiagram) -> Result<DdModule> {
        match path {
            Some(p) => {
                let text = self.read(p)?;
                DdModule::from_json(&text)
            }
            None => dd_half_identity(z),
        }
    }
}

enum AaSource {
    Diagram(Box<Diagram>),
    Table(Box<TableAa>),
}

impl AaSource {
    fn with<R>(&self, max_area: u32, f: impl FnOnce(&dyn AaModule) -> R) -> R {
        match self {
            AaSource::Diagram(d) => f(&DiagramAa::new(d, max_area)),
            AaSource::Table(t) => f(t.as_ref()),
        }
    }

    /// The arc diagram Z on the right (ρ) side.
    fn right_arc(&self) -> ArcDiagram {
        match self {
            AaSource::Diagram(d) => d.rho_algebra().diagram().clone(),
            AaSource::Table(t) => t.right_algebra().diagram().clone(),
        }
    }
}

fn gen_ids<M: AaModule + ?Sized>(m: &M) -> Vec<String> {
    m.generators().iter().map(|g| g.id.clone()).collect()
}

fn query_json(d: &Diagram, q: &PolygonQuery) -> Value {
    let name = |v: usize| {
        d.generators()
            .into_iter()
            .find(|g| g.vertex == v)
            .map_or_else(|| format!("#{v}"), |g| g.id)
    };
    json!({
        "x": name(q.x),
        "y": name(q.y),
        "sigmas": q.sigmas.iter().map(|c| d.sigma_algebra().chord_name(*c)).collect::<Vec<_>>(),
        "rhos": q.rhos.iter().map(|c| d.rho_algebra().chord_name(*c)).collect::<Vec<_>>(),
    })
}

fn cmd_validate(run: &mut Run, path: &Path) -> Result<()> {
    run.read(path)?;
    let d = Diagram::load(path)?;
    let report = d.validate();
    for f in &report.failures {
        run.body
            .witnesses
            .push(format!("{} at {}: {}", f.check, f.cell, f.detail));
    }
    run.put(
        "cells",
        json!({
            "vertices": d.vertices.len(),
            "edges": d.edges.len(),
            "faces": d.faces.len(),
            "euler_characteristic": d.euler_characteristic(),
        }),
    );
    if report.ok() {
        run.put("generators", serde_json::to_value(d.generators())?);
    }
    run.pass_if(
        "diagram is valid",
        report.ok(),
        serde_json::to_value(&report)?,
    );
    Ok(())
}

fn cmd_algebra(run: &mut Run, path: &Path) -> Result<()> {
    let z = run.arc(path)?;
    let alg = Algebra::new(z.clone(), 'I');
    let basis = alg.basis();
    let mut products = Vec::new();
    for &a in &basis {
        for &b in &basis {
            if let Some(c) = alg.mul_basis(a, b) {
                products.push(format!(
                    "{}·{} = {}",
                    alg.basis_name(a),
                    alg.basis_name(b),
                    alg.basis_name(c)
                ));
            }
        }
    }
    let dual = dual_diagram(&z)?;
    run.put(
        "algebra",
        json!({
            "idempotents": (0..alg.num_idempotents()).map(|i| alg.idem_name(i)).collect::<Vec<_>>(),
            "chords": alg.chords().into_iter().map(|c| json!({"name": alg.chord_name(c), "length": c.len()})).collect::<Vec<_>>(),
            "short_chords": alg.short_chords().into_iter().map(|c| alg.chord_name(c)).collect::<Vec<_>>(),
            "nonzero_products": products,
        }),
    );
    run.put("dual", serde_json::to_value(dual.spec())?);
    let s = check_soundness(&alg);
    run.body
        .witnesses
        .extend(s.associativity_failures.iter().cloned());
    run.pass_if("associativity and unit", s.ok(), serde_json::to_value(&s)?);
    Ok(())
}

fn cmd_generators(run: &mut Run, path: &Path) -> Result<()> {
    let d = run.diagram(path)?;
    let gens = d.generators();
    run.put("count", json!(gens.len()));
    run.put("generators", serde_json::to_value(gens)?);
    Ok(())
}

fn cmd_count(
    run: &mut Run,
    path: &Path,
    x: Option<&str>,
    y: Option<&str>,
    sigmas: &[String],
    rhos: &[String],
) -> Result<()> {
    let d = run.diagram(path)?;
    let counter = PeelCounter::new(&d, run.opts.max_area);
    if x.is_some() || y.is_some() {
        let vertex = |id: Option<&str>| -> Result<usize> {
            let id = id.ok_or_else(|| Error::Malformed("a query needs both --x and --y".into()))?;
            d.generators()
                .into_iter()
                .find(|g| g.id == id)
                .map(|g| g.vertex)
                .ok_or_else(|| Error::Malformed(format!("no generator {id}")))
        };
        let q = PolygonQuery {
            x: vertex(x)?,
            y: vertex(y)?,
            sigmas: sigmas
                .iter()
                .map(|s| d.sigma_algebra().parse_chord(s))
                .collect::<Result<_>>()?,
            rhos: rhos
                .iter()
                .map(|s| d.rho_algebra().parse_chord(s))
                .collect::<Result<_>>()?,
        };
        let polys = counter.enumerate(&q)?;
        let oracle = oracle_count(&d, &q, run.opts.max_area)?;
        run.put("query", query_json(&d, &q));
        run.put("count", json!(polys.len()));
        run.put("count_mod2", json!(polys.len() % 2));
        run.put(
            "domains",
            json!(polys.iter().map(|p| p.domain.clone()).collect::<Vec<_>>()),
        );
        run.pass_if(
            "peeling agrees with the oracle",
            polys.len() as u64 == oracle,
            json!({"peeling": polys.len(), "oracle": oracle}),
        );
        return Ok(());
    }
    let census = oracle_census(&d, run.opts.max_area, run.opts.max_chords);
    let queries = all_queries(&d, run.opts.max_chords);
    let mut nonzero = Vec::new();
    let mut mismatches = Vec::new();
    for q in &queries {
        let n = counter.count(q)?;
        let o = census.counts.get(q).copied().unwrap_or(0);
        if n != o {
            mismatches.push(json!({"query": query_json(&d, q), "peeling": n, "oracle": o}));
        }
        if n > 0 {
            let mut entry = query_json(&d, q);
            entry["count"] = json!(n);
            nonzero.push(entry);
        }
    }
    for q in census.counts.keys() {
        if !queries.contains(q) {
            mismatches.push(json!({"query": query_json(&d, q), "peeling": "not a query", "oracle": census.counts[q]}));
        }
    }
    run.put("queries", json!(queries.len()));
    run.put("nonzero", json!(nonzero));
    for m in &mismatches {
        run.body.witnesses.push(m.to_string());
    }
    let status = if !mismatches.is_empty() {
        Status::Fail
    } else if census.truncated {
        run.body.truncated = true;
        run.body
            .truncation
            .push(format!("oracle census cut at area {}", run.opts.max_area));
        Status::Inconclusive
    } else {
        Status::Pass
    };
    run.verdict(
        "peeling agrees with the oracle on every query",
        status,
        json!({"queries": queries.len(), "mismatches": mismatches.len()}),
    );
    Ok(())
}

fn cmd_module(run: &mut Run, path: &Path, out: Option<&Path>) -> Result<()> {
    let d = run.diagram(path)?;
    let m = build_module(&d, run.opts.max_chords, run.opts.max_area)?;
    run.put("generators", json!(gen_ids(&m)));
    run.put("entries", json!(m.entries().count()));
    let v = verify_aa(&m, run.opts.max_chords)?;
    run.relation("A∞ relations", &v);
    run.emit("module", m.to_json(), out)
}

fn cmd_verify(run: &mut Run, path: &Path) -> Result<()> {
    let text = run.read(path)?;
    let v: Value = serde_json::from_str(&text)?;
    match v.get("type").and_then(Value::as_str) {
        Some("AA") => {
            let t = TableAa::from_json(&text)?;
            let verdict = verify_aa(&t, t.bound())?;
            run.relation("A∞ relations", &verdict);
        }
        Some("DA") => {
            let t = TableDa::from_json(&text)?;
            let verdict = verify_da(&t, t.bound())?;
            run.relation("DA structure equation", &verdict);
        }
        Some("DD") => {
            let t = DdModule::from_json(&text)?;
            run.relation("DD structure equation", &verify_dd(&t));
        }
        other => {
            return Err(Error::Malformed(format!("unknown bimodule type {other:?}")));
        }
    }
    Ok(())
}

fn cmd_box(
    run: &mut Run,
    right: &Path,
    left: Option<&Path>,
    dd: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let opts = run.opts;
    let r = run.aa_source(right)?;
    let dd = run.dd(dd, &r.right_arc())?;
    let da = r.with(opts.max_area, |m| -> Result<TableDa> {
        tabulate_da(&dd_box_aa(&dd, m, opts.box_cap)?, opts.max_chords)
    })?;
    run.put(
        "da_generators",
        json!(da
            .generators()
            .iter()
            .map(|g| g.id.clone())
            .collect::<Vec<_>>()),
    );
    let v = verify_da(&da, opts.max_chords)?;
    run.relation("DA structure equation of DD ⊠ M", &v);
    let Some(left) = left else {
        return run.emit("da", da.to_json(), out);
    };
    let l = run.aa_source(left)?;
    let prod = l.with(opts.max_area, |m| -> Result<TableAa> {
        tabulate(&aa_box_da(m, &da, opts.box_cap)?, opts.max_chords)
    })?;
    run.put("generators", json!(gen_ids(&prod)));
    let v = verify_aa(&prod, opts.max_chords)?;
    run.relation("A∞ relations of M ⊠ (DD ⊠ M)", &v);
    run.emit("module", prod.to_json(), out)
}

fn cmd_reduce(run: &mut Run, path: &Path, out: Option<&Path>) -> Result<()> {
    let m = run.aa_table(path)?;
    let r = reduce(&m, run.opts.max_chords)?;
    run.put("cancelled", json!(r.cancelled));
    run.put("generators", json!(gen_ids(&r.reduced)));
    run.put(
        "homology_blocks",
        serde_json::to_value(homology_blocks(&r.reduced)?)?,
    );
    let minimal = (0..r.reduced.generators().len()).all(|x| r.reduced.differential(x).is_zero());
    run.pass_if(
        "m1 vanishes",
        minimal,
        json!({"generators": r.reduced.generators().len()}),
    );
    let v = verify_aa(&r.reduced, r.reduced.bound())?;
    run.relation("A∞ relations of the minimal model", &v);
    run.emit("module", r.reduced.to_json(), out)
}

fn cmd_compare(run: &mut Run, a: &Path, b: &Path) -> Result<()> {
    let ma = run.aa_table(a)?;
    let mb = run.aa_table(b)?;
    let bound = run.opts.max_chords.min(ma.bound()).min(mb.bound());
    let ra = reduce(&ma, bound)?;
    let rb = reduce(&mb, bound)?;
    run.put(
        "generators",
        json!([gen_ids(&ra.reduced), gen_ids(&rb.reduced)]),
    );
    let v = isomorphic_reduced(&ra.reduced, &rb.reduced, bound)?;
    run.iso("minimal models are isomorphic", &v);
    Ok(())
}

fn cmd_identity_check(run: &mut Run, path: &Path, dd: Option<&Path>) -> Result<()> {
    let opts = run.opts;
    let z = run.arc(path)?;
    let d = identity_diagram(&z)?;
    let dd = run.dd(dd, &z)?;
    let m = DiagramAa::new(&d, opts.max_area);
    let da = tabulate_da(&dd_box_aa(&dd, &m, opts.box_cap)?, opts.max_chords)?;
    let v = verify_da(&da, opts.max_chords)?;
    run.relation("DA structure equation of DD ⊠ M(I)", &v);
    let (red, cancelled) = reduce_da(&da, opts.box_cap)?;
    run.put("cancelled", json!(cancelled));
    run.put(
        "generators",
        json!(red
            .generators()
            .iter()
            .map(|g| g.id.clone())
            .collect::<Vec<_>>()),
    );
    let id = identity_da(red.in_algebra());
    let iso = isomorphic_da(&red, &id, opts.max_chords)?;
    run.iso("reduced DD ⊠ M(I) is isomorphic to the identity", &iso);
    let failures = identity_law_failures(&red)?;
    run.body.witnesses.extend(failures.iter().cloned());
    let basis: Vec<AlgBasis> = red.in_algebra().basis();
    run.pass_if(
        "δ(ι, a) = a ⊗ ι on every basis element",
        failures.is_empty(),
        json!({"basis_elements": basis.len(), "failures": failures}),
    );
    Ok(())
}

fn cmd_compose_check(run: &mut Run, dphi: &Path, dpsi: &Path, dcomp: &Path) -> Result<()> {
    let opts = run.opts;
    let phi = run.aa_source(dphi)?;
    let psi = run.aa_source(dpsi)?;
    let comp = run.aa_table(dcomp)?;
    let dd = dd_half_identity(&psi.right_arc())?;
    let da = psi.with(opts.max_area, |m| -> Result<TableDa> {
        tabulate_da(&dd_box_aa(&dd, m, opts.box_cap)?, opts.max_chords)
    })?;
    let prod = phi.with(opts.max_area, |m| -> Result<TableAa> {
        tabulate(&aa_box_da(m, &da, opts.box_cap)?, opts.max_chords)
    })?;
    let v = verify_aa(&prod, opts.max_chords)?;
    run.relation("A∞ relations of the product", &v);
    let bound = opts.max_chords.min(comp.bound());
    let rp = reduce(&prod, bound)?;
    let rc = reduce(&comp, bound)?;
    run.put(
        "generators",
        json!({"product": gen_ids(&prod), "reduced_product": gen_ids(&rp.reduced), "reduced_composite": gen_ids(&rc.reduced)}),
    );
    let iso = isomorphic_reduced(&rp.reduced, &rc.reduced, bound)?;
    run.iso("product and composite have isomorphic minimal models", &iso);
    Ok(())
}

fn cmd_faithful_check(run: &mut Run, path: &Path) -> Result<()> {
    let m = run.aa_table(path)?;
    let hb = homology_blocks(&m)?;
    run.put("homology_blocks", serde_json::to_value(&hb)?);
    run.pass_if(
        "homology block matrix is the identity",
        hb.is_identity(),
        json!({"ranks": hb.ranks}),
    );
    Ok(())
}

fn dispatch(run: &mut Run, cmd: &Command) -> Result<()> {
    match cmd {
        Command::Validate { path } => cmd_validate(run, path),
        Command::Algebra { path } => cmd_algebra(run, path),
        Command::Generators { path } => cmd_generators(run, path),
        Command::Count {
            path,
            x,
            y,
            sigmas,
            rhos,
        } => cmd_count(run, path, x.as_deref(), y.as_deref(), sigmas, rhos),
        Command::Module { path, out } => cmd_module(run, path, out.as_deref()),
        Command::Verify { path } => cmd_verify(run, path),
        Command::Box {
            right,
            left,
            dd,
            out,
        } => cmd_box(run, right, left.as_deref(), dd.as_deref(), out.as_deref()),
        Command::Reduce { path, out } => cmd_reduce(run, path, out.as_deref()),
        Command::Compare { a, b } => cmd_compare(run, a, b),
        Command::IdentityCheck { path, dd } => cmd_identity_check(run, path, dd.as_deref()),
        Command::ComposeCheck { dphi, dpsi, dcomp } => cmd_compose_check(run, dphi, dpsi, dcomp),
        Command::FaithfulCheck { path } => cmd_faithful_check(run, path),
    }
}

fn exit_code(body: &ReportBody, err: Option<&Error>) -> i32 {
    match err {
        Some(e) if e.is_truncation() => EXIT_INCONCLUSIVE,
        Some(_) => EXIT_INPUT,
        None if body.verdicts.iter().any(|v| v.status == Status::Fail) => EXIT_FAIL,
        None if body.truncated
            || body
                .verdicts
                .iter()
                .any(|v| v.status == Status::Inconclusive) =>
        {
            EXIT_INCONCLUSIVE
        }
        None => EXIT_PASS,
    }
}

/// Runs a parsed command line and returns its report.
pub fn run_cli(cli: &Cli, mut argv: Vec<String>) -> RunReport {
    let start = Instant::now();
    // the program path would tie the digest to the install location
    if let Some(first) = argv.first_mut() {
        *first = "bhf".into();
    }
    if let Some(n) = cli.opts.threads {
        // a pool that is already set up (as in tests) is kept
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let mut run = Run {
        opts: cli.opts,
        body: ReportBody {
            command: argv,
            ..ReportBody::default()
        },
    };
    let result = dispatch(&mut run, &cli.command);
    let err = result.err();
    if let Some(e) = &err {
        if e.is_truncation() {
            run.body.truncated = true;
            run.body.truncation.push(e.to_string());
        } else {
            run.body.error = Some(e.to_string());
        }
    }
    let exit_code = exit_code(&run.body, err.as_ref());
    let canonical = serde_json::to_vec(&(&run.body, exit_code)).expect("report serializes");
    RunReport {
        body: run.body,
        exit_code,
        digest: hex(&Sha256::digest(&canonical)),
        wall_time_ms: start.elapsed().as_millis(),
    }
}

/// One line per verdict, for standard error.
pub fn summary(report: &RunReport) -> String {
    let mut lines = Vec::new();
    for v in &report.body.verdicts {
        let tag = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        lines.push(format!("{tag}  {}", v.check));
    }
    if let Some(e) = &report.body.error {
        lines.push(format!("ERROR  {e}"));
    }
    for t in &report.body.truncation {
        lines.push(format!("TRUNCATED  {t}"));
    }
    lines.push(format!(
        "exit {} in {} ms",
        report.exit_code, report.wall_time_ms
    ));
    lines.join("\n")
}

/// Parses arguments, runs, and returns the exit code and report. Argument
/// errors come back as clap errors so the caller can print usage.
pub fn execute<I, S>(args: I) -> std::result::Result<RunReport, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv)?;
    Ok(run_cli(&cli, argv))
}
