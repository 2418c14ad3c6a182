use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use dualsample::annealer::{self, AnnealConfig, Objectives};
use dualsample::diversity;
use dualsample::geomodel::{validate_candidates, CandidateSet, SamplingUnit};
use dualsample::ingest::{self, BoundingBox, GeoOrigin};
use dualsample::metrics::{self, ConfusionMatrix, LabelGrid};
use dualsample::strata::{self, Stratum};
use dualsample::synth::{self, CompareSetup, Method, ScenarioSpec};

use crate::output::{sha256_hex, Recorder, RunManifest};
use crate::{
    AnnealArgs, CliError, Command, CompareArgs, EnrichArgs, EvalArgs, EvalMode, GridArgs, ModeArg,
    RerunArgs, ResolveArgs, SampleArgs, ScenarioArgs, ScenarioFlags, StratifyArgs, StratumArg,
};

fn data_err(path: &Path, e: impl Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn config_json<S: serde::Serialize>(args: &S) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

pub fn dispatch(command: Command, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Grid(a) => grid(a, argv, out),
        Command::Enrich(a) => enrich(a, argv, out),
        Command::Stratify(a) => stratify(a, argv, out),
        Command::Sample(a) => sample(a, argv, out),
        Command::Compare(a) => compare(a, argv, out),
        Command::Scenario(a) => scenario(a, argv, out),
        Command::Eval(a) => eval(a, argv, out),
        Command::Resolve(a) => resolve(a, argv, out),
        Command::Rerun(a) => rerun(a, out),
    }
}

fn origin_of(v: &Option<Vec<f64>>) -> Result<Option<GeoOrigin<f64>>, CliError> {
    match v.as_deref() {
        None => Ok(None),
        Some([lon, lat]) => GeoOrigin::new(*lon, *lat)
            .map(Some)
            .map_err(|e| usage(format!("--origin: {e}"))),
        Some(_) => Err(usage("--origin expects lon,lat")),
    }
}

fn read_units(rec: &mut Recorder, path: &Path) -> Result<Vec<SamplingUnit<f64>>, CliError> {
    let bytes = rec.read(path)?;
    ingest::parse_units_csv(bytes.as_slice()).map_err(|e| data_err(path, e))
}

fn units_csv(units: &[SamplingUnit<f64>], extra: Option<(&str, &str)>) -> Vec<u8> {
    let mut buf = Vec::new();
    ingest::write_units_csv(units, extra, &mut buf).expect("writing to memory");
    buf
}

fn key_values(pairs: &[(&str, String)]) -> Vec<u8> {
    let mut s = String::from("key,value\n");
    for (k, v) in pairs {
        s.push_str(&format!("{k},{v}\n"));
    }
    s.into_bytes()
}

fn print_pairs(out: &mut dyn Write, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}={v}");
    }
}

fn grid(args: GridArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let origin = origin_of(&args.origin)?;
    let boundary = match &args.boundary {
        Some(path) => {
            let text = rec.read_string(path)?;
            Some(ingest::parse_boundary_geojson(&text, origin).map_err(|e| data_err(path, e))?)
        }
        None => None,
    };
    let bbox = match (&args.bbox, &boundary) {
        (Some(b), _) => match b.as_slice() {
            [a, b, c, d] => {
                BoundingBox::new(*a, *b, *c, *d).map_err(|e| usage(format!("--bbox: {e}")))?
            }
            _ => return Err(usage("--bbox expects min_x,min_y,max_x,max_y")),
        },
        (None, Some(bd)) => {
            let (a, b, c, d) = bd.extent().expect("parsed boundary has points");
            BoundingBox::new(a, b, c, d)
                .map_err(|e| data_err(args.boundary.as_deref().unwrap_or(Path::new("")), e))?
        }
        (None, None) => return Err(usage("grid needs --bbox or --boundary")),
    };
    let mut units = ingest::generate_grid(&bbox, args.cell_side)
        .map_err(|e| usage(format!("--cell-side: {e}")))?;
    let generated = units.len();
    if let Some(bd) = &boundary {
        units = ingest::filter_by_boundary(units, bd);
    }
    rec.write(&args.out, &units_csv(&units, None))?;
    print_pairs(
        out,
        &[
            ("cells_generated", generated.to_string()),
            ("cells_kept", units.len().to_string()),
        ],
    );
    rec.finish("grid", argv, config_json(&args), None)?;
    Ok(())
}

fn enrich(args: EnrichArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let origin = origin_of(&args.origin)?;
    let mut units = read_units(&mut rec, &args.units)?;
    if units.is_empty() {
        return Err(data_err(&args.units, "no units"));
    }
    for u in &mut units {
        u.poi_counts.clear();
    }
    let poi_bytes = rec.read(&args.pois)?;
    let poi_file = ingest::parse_pois_csv(poi_bytes.as_slice(), origin)
        .map_err(|e| data_err(&args.pois, e))?;
    let assigned = ingest::assign_pois_to_cells(&poi_file.pois, &mut units)
        .map_err(|e| data_err(&args.units, e))?;

    let mut pairs = vec![
        ("units", units.len().to_string()),
        ("pois", poi_file.pois.len().to_string()),
        ("assigned", assigned.assigned.to_string()),
        ("out_of_grid_count", assigned.out_of_grid_count.to_string()),
    ];
    if let Some(o) = poi_file.origin {
        pairs.push(("origin_lon", o.lon0.to_string()));
        pairs.push(("origin_lat", o.lat0.to_string()));
        pairs.push(("origin_derived", poi_file.origin_derived.to_string()));
    }
    if let Some(path) = &args.landcover {
        let bytes = rec.read(path)?;
        let points = ingest::parse_labeled_points(bytes.as_slice(), origin)
            .map_err(|e| data_err(path, e))?;
        let s =
            ingest::assign_builtup(&points, &mut units).map_err(|e| data_err(&args.units, e))?;
        pairs.push(("landcover_points", points.len().to_string()));
        pairs.push(("landcover_empty_cells", s.empty_cells.to_string()));
        pairs.push(("landcover_out_of_grid", s.out_of_grid_count.to_string()));
    }
    diversity::enrich_units(&mut units).map_err(|e| data_err(&args.units, e))?;
    let set = validate_candidates(units).map_err(|e| data_err(&args.units, e))?;

    rec.write(&args.out, &units_csv(set.units(), None))?;
    if let Some(path) = &args.summary {
        rec.write(path, &key_values(&pairs))?;
    }
    print_pairs(out, &pairs);
    rec.finish("enrich", argv, config_json(&args), None)?;
    Ok(())
}

fn resolve_threshold(spec: &str, set: &CandidateSet<f64>) -> Result<(f64, &'static str), CliError> {
    if spec == "auto" {
        let builtups: Vec<f64> = set.units().iter().map(|u| u.builtup).collect();
        let t = strata::quartile_threshold(&builtups).map_err(|e| CliError::Data(e.to_string()))?;
        return Ok((t, "auto"));
    }
    let t: f64 = spec.parse().map_err(|_| {
        usage(format!(
            "--threshold must be `auto` or a number, got {spec:?}"
        ))
    })?;
    strata::check_threshold(t).map_err(|e| usage(format!("--threshold: {e}")))?;
    Ok((t, "value"))
}

fn stratify(args: StratifyArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let units = read_units(&mut rec, &args.units)?;
    let set = validate_candidates(units).map_err(|e| data_err(&args.units, e))?;
    let (threshold, mode) = resolve_threshold(&args.threshold, &set)?;
    let split = strata::stratify(&set, threshold).map_err(|e| data_err(&args.units, e))?;
    rec.write(&args.dense_out, &units_csv(split.dense.units(), None))?;
    rec.write(&args.sparse_out, &units_csv(split.sparse.units(), None))?;
    let pairs = [
        ("threshold", threshold.to_string()),
        ("threshold_mode", mode.to_string()),
        ("dense_count", split.dense.len().to_string()),
        ("sparse_count", split.sparse.len().to_string()),
        ("dense_area_m2", split.dense.total_area().to_string()),
        ("sparse_area_m2", split.sparse.total_area().to_string()),
    ];
    if let Some(path) = &args.summary {
        rec.write(path, &key_values(&pairs))?;
    }
    print_pairs(out, &pairs);
    rec.finish("stratify", argv, config_json(&args), None)?;
    Ok(())
}

fn anneal_config(
    a: &AnnealArgs,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<AnnealConfig<f64>, CliError> {
    let config = AnnealConfig {
        t0: a.t0,
        alpha: a.alpha,
        t_tol: a.ttol,
        max_iters: a.iters,
        seed,
        stream,
        n,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn stratum_of(s: StratumArg) -> Stratum {
    match s {
        StratumArg::Dense => Stratum::Dense,
        StratumArg::Sparse => Stratum::Sparse,
    }
}

fn sample(args: SampleArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let stratum = stratum_of(args.stratum);
    let config = anneal_config(&args.anneal, args.n, args.seed, stratum.stream())?;
    let units = read_units(&mut rec, &args.units)?;
    let set = validate_candidates(units).map_err(|e| data_err(&args.units, e))?;
    let objectives = match args.mode {
        ModeArg::Dual => Objectives::Dual,
        ModeArg::Spatial => Objectives::SpatialOnly,
    };
    let result = annealer::run(&set, &config, objectives).map_err(|e| data_err(&args.units, e))?;

    let selected: Vec<SamplingUnit<f64>> = result
        .best
        .sorted_ids()
        .into_iter()
        .map(|id| set.get(id).expect("solution ids come from the set").clone())
        .collect();
    rec.write(
        &args.out,
        &units_csv(&selected, Some(("stratum", stratum.as_str()))),
    )?;
    if let Some(path) = &args.trace {
        let mut buf = Vec::new();
        annealer::write_trace_csv(&result.trace, &mut buf).expect("writing to memory");
        rec.write(path, &buf)?;
    }
    print_pairs(
        out,
        &[
            ("iterations", result.trace.len().to_string()),
            ("initial_cost_ann", result.initial.costs.ann.to_string()),
            ("initial_cost_amul", result.initial.costs.amul.to_string()),
            ("best_cost_ann", result.best.costs.ann.to_string()),
            ("best_cost_amul", result.best.costs.amul.to_string()),
            ("last_cost_ann", result.last.costs.ann.to_string()),
            ("last_cost_amul", result.last.costs.amul.to_string()),
        ],
    );
    rec.finish("sample", argv, config_json(&args), Some(args.seed))?;
    Ok(())
}

fn scenario_spec(f: &ScenarioFlags) -> ScenarioSpec<f64> {
    ScenarioSpec {
        nx: f.nx,
        ny: f.ny,
        cell_side: f.cell_side,
        n_clusters: f.clusters,
        pois_per_cluster: f.pois_per_cluster,
        n_categories: f.categories,
        cluster_spread: f.spread,
        builtup_peak: f.builtup_peak,
        seed: f.scenario_seed,
    }
}

fn compare(args: CompareArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let (set, source) = match &args.units {
        Some(path) => {
            let units = read_units(&mut rec, path)?;
            let set = validate_candidates(units).map_err(|e| data_err(path, e))?;
            if !set.is_enriched() {
                return Err(data_err(
                    path,
                    "units lack a mul column; run `enrich` first",
                ));
            }
            (set, path.display().to_string())
        }
        None => {
            let spec = scenario_spec(&args.scenario);
            let sc = synth::generate_scenario(&spec).map_err(|e| usage(e.to_string()))?;
            (
                sc.enriched().map_err(|e| CliError::Data(e.to_string()))?,
                "scenario".to_string(),
            )
        }
    };
    let (threshold, _) = resolve_threshold(&args.threshold, &set)?;
    let split =
        strata::stratify(&set, threshold).map_err(|e| CliError::Data(format!("{source}: {e}")))?;
    let allocation =
        strata::allocate(args.n, args.dense_fraction).map_err(|e| usage(e.to_string()))?;
    let setup = CompareSetup {
        strata: &split,
        allocation,
        config: anneal_config(&args.anneal, allocation.n_dense.max(2), 0, 0)?,
        record_timing: args.timing,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| usage(format!("--jobs: {e}")))?;
    let report = pool
        .install(|| synth::compare(&setup, &methods, args.seeds))
        .map_err(|e| CliError::Data(format!("{source}: {e}")))?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).expect("writing to memory");
    rec.write(&args.out, &buf)?;
    for ((m, s), (ann, amul)) in report.means() {
        let _ = writeln!(out, "{m},{s},mean_cost_ann={ann},mean_cost_amul={amul}");
    }
    rec.finish("compare", argv, config_json(&args), None)?;
    Ok(())
}

fn scenario(args: ScenarioArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let spec = scenario_spec(&args.scenario);
    let sc = synth::generate_scenario(&spec).map_err(|e| usage(e.to_string()))?;
    let set = sc.enriched().map_err(|e| CliError::Data(e.to_string()))?;
    rec.write(&args.units_out, &units_csv(set.units(), None))?;
    let mut pois = String::from("id,x,y,category\n");
    for p in &sc.pois {
        pois.push_str(&format!(
            "{},{},{},{}\n",
            p.id, p.location.x, p.location.y, p.category
        ));
    }
    rec.write(&args.pois_out, pois.as_bytes())?;
    print_pairs(
        out,
        &[
            ("units", set.len().to_string()),
            ("pois", sc.pois.len().to_string()),
            ("out_of_grid_count", sc.out_of_grid_pois.to_string()),
        ],
    );
    rec.finish("scenario", argv, config_json(&args), Some(spec.seed))?;
    Ok(())
}

fn read_grid(rec: &mut Recorder, path: &Path) -> Result<LabelGrid, CliError> {
    let bytes = rec.read(path)?;
    ingest::parse_label_grid(bytes.as_slice()).map_err(|e| data_err(path, e))
}

fn read_classes(rec: &mut Recorder, path: &Path) -> Result<ingest::ClassMap, CliError> {
    let bytes = rec.read(path)?;
    ingest::parse_class_map(bytes.as_slice()).map_err(|e| data_err(path, e))
}

fn eval(args: EvalArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let pred = read_grid(&mut rec, &args.pred)?;
    let truth = read_grid(&mut rec, &args.truth)?;
    let pairs: Vec<(&str, String)> = match args.mode {
        EvalMode::Binary => {
            let c =
                metrics::confusion_binary(&pred, &truth).map_err(|e| data_err(&args.pred, e))?;
            vec![
                ("tp", c.tp.to_string()),
                ("fp", c.fp.to_string()),
                ("fn", c.fn_.to_string()),
                ("tn", c.tn.to_string()),
                ("precision", c.precision::<f64>().to_string()),
                ("recall", c.recall::<f64>().to_string()),
                ("f1", c.f1::<f64>().to_string()),
                ("iou", c.iou::<f64>().to_string()),
                ("empty_vs_empty", (c.is_empty_vs_empty() as u8).to_string()),
            ]
        }
        EvalMode::Kappa => {
            let path = args
                .classes
                .as_deref()
                .ok_or_else(|| usage("--mode kappa needs --classes"))?;
            let classes = read_classes(&mut rec, path)?;
            let to_ordinals = |g: &LabelGrid, src: &Path| -> Result<LabelGrid, CliError> {
                let cells = g
                    .cells
                    .iter()
                    .map(|&c| {
                        classes
                            .ordinal(c)
                            .map(|o| o as u32)
                            .ok_or_else(|| data_err(src, format!("label {c} not in class map")))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(LabelGrid::new(g.rows, g.cols, cells))
            };
            let p = to_ordinals(&pred, &args.pred)?;
            let t = to_ordinals(&truth, &args.truth)?;
            let m = ConfusionMatrix::from_grids(classes.len(), &p, &t)
                .map_err(|e| data_err(&args.pred, e))?;
            let kappa = metrics::kappa::<f64>(&m).map_err(|e| data_err(&args.pred, e))?;
            vec![
                ("k", m.k().to_string()),
                ("n", m.total().to_string()),
                (
                    "p_o",
                    m.observed_agreement::<f64>()
                        .map_err(|e| data_err(&args.pred, e))?
                        .to_string(),
                ),
                (
                    "p_e",
                    m.chance_agreement::<f64>()
                        .map_err(|e| data_err(&args.pred, e))?
                        .to_string(),
                ),
                ("kappa", kappa.to_string()),
            ]
        }
    };
    let mut text = String::from("metric,value\n");
    for (k, v) in &pairs {
        text.push_str(&format!("{k},{v}\n"));
    }
    rec.write(&args.out, text.as_bytes())?;
    print_pairs(out, &pairs);
    rec.finish("eval", argv, config_json(&args), None)?;
    Ok(())
}

fn resolve(args: ResolveArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rec = Recorder::default();
    let classes = read_classes(&mut rec, &args.classes)?;
    let bytes = rec.read(&args.pixels)?;
    let instances = ingest::parse_instance_pixels(bytes.as_slice(), &classes)
        .map_err(|e| data_err(&args.pixels, e))?;
    let mut text = String::from("instance_id,class_id,class_name\n");
    for (instance, counts) in &instances {
        let ordinal = metrics::resolve_instance_label(counts)
            .map_err(|e| data_err(&args.pixels, format!("instance {instance}: {e}")))?;
        text.push_str(&format!(
            "{instance},{},{}\n",
            classes.ids[ordinal], classes.names[ordinal]
        ));
    }
    rec.write(&args.out, text.as_bytes())?;
    let _ = writeln!(out, "instances={}", instances.len());
    rec.finish("resolve", argv, config_json(&args), None)?;
    Ok(())
}

fn rerun(args: RerunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.manifest).map_err(|e| data_err(&args.manifest, e))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| data_err(&args.manifest, e))?;
    for input in &manifest.inputs {
        let bytes = std::fs::read(&input.path).map_err(|e| data_err(Path::new(&input.path), e))?;
        if sha256_hex(&bytes) != input.sha256 {
            return Err(data_err(
                Path::new(&input.path),
                "input changed since the manifest was written",
            ));
        }
    }
    let mut argv = vec!["dualsample".to_string()];
    argv.extend(manifest.argv.iter().cloned());
    crate::run_with(&argv, out)
}
