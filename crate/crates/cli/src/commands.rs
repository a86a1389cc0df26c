use std::fs;
use std::path::Path;

use trajraster::geometry::{GridSpec, Trajectory, WaypointState};
use trajraster::loss::combined_loss;
use trajraster::metrics::evaluate;
use trajraster::optim::{
    run_toy, toy_scene, OptimizerConfig, DEFAULT_ITERATIONS, DEFAULT_STEP_THETA, DEFAULT_STEP_XY,
};
use trajraster::raster::rasterize_waypoint;
use trajraster::scenario::{Actor, ConfigOverrides, ScenarioDoc};
use trajraster::{Error, Polygon, PolygonSet, Result};

use crate::config::{ConfigEcho, GridEcho};
use crate::export;
use crate::{InitArgs, LossArgs, MetricsArgs, RasterArgs, ToyArgs};

const REPORT_SCHEMA_VERSION: u32 = 1;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Write pretty JSON into `dir/name`, or to stdout when no directory given.
fn emit_json(dir: Option<&Path>, name: &str, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialization") + "\n";
    match dir {
        Some(dir) => {
            ensure_dir(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_loss(args: &LossArgs) -> Result<()> {
    let doc = ScenarioDoc::load(&args.scenario)?;
    let cfg = args.config.resolve(&doc.config);
    let mask = doc.mask();
    let (preds, gts) = doc.trajectory_pairs();
    let report = combined_loss(&preds, &gts, &mask, &cfg)?;

    let n_actors = doc.actors.len();
    let n_steps = doc.actors[0].predicted.len();
    let n_waypoints = (n_actors * n_steps) as f64;
    let per_actor: Vec<serde_json::Value> = doc
        .actors
        .iter()
        .enumerate()
        .map(|(idx, actor)| {
            serde_json::json!({
                "id": actor.id,
                "ellipse_per_step": report.ellipse_per_step[idx],
                "ellipse_grad": report.ellipse_grad[idx],
            })
        })
        .collect();

    let value = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "loss",
        "scenario": args.scenario.display().to_string(),
        "config": ConfigEcho::from(&cfg),
        "grid": GridEcho::from(&doc.grid),
        "n_actors": n_actors,
        "n_steps": n_steps,
        "totals": {
            "vanilla": report.vanilla,
            "ellipse": report.ellipse,
            "total": report.total,
        },
        "per_waypoint_mean": {
            "vanilla": report.vanilla / n_waypoints,
            "ellipse": report.ellipse / n_waypoints,
            "total": report.total / n_waypoints,
        },
        "per_actor": per_actor,
    });
    emit_json(args.out.as_deref(), "loss_report.json", &value)
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let doc = ScenarioDoc::load(&args.scenario)?;
    let cfg = crate::config::ConfigFlags {
        k: None,
        lambda: None,
        truncation_md: None,
        beta: None,
    }
    .resolve(&doc.config);
    let mask = doc.mask();
    let (preds, gts) = doc.trajectory_pairs();
    let report = evaluate(&preds, &gts, &mask)?;

    let value = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "metrics",
        "scenario": args.scenario.display().to_string(),
        "config": ConfigEcho::from(&cfg),
        "grid": GridEcho::from(&doc.grid),
        "actor_ids": doc.actors.iter().map(|a| a.id.clone()).collect::<Vec<_>>(),
        "report": report,
    });
    emit_json(args.out.as_deref(), "metrics_report.json", &value)
}

pub fn cmd_toy(args: &ToyArgs) -> Result<()> {
    // Scene: either the first actor of a scenario file, or the packaged
    // half-plane scene.
    let (initial, mask, overrides, scenario_label) = match &args.scenario {
        Some(path) => {
            let doc = ScenarioDoc::load(path)?;
            let actor = &doc.actors[0];
            let initial = actor.predicted.waypoints()[0];
            (
                initial,
                doc.mask(),
                doc.config,
                path.display().to_string(),
            )
        }
        None => {
            let scene = toy_scene();
            (
                scene.initial,
                scene.mask,
                ConfigOverrides::default(),
                "builtin half-plane scene".to_string(),
            )
        }
    };

    let loss_cfg = args.config.resolve(&overrides);
    let cfg = OptimizerConfig {
        iterations: args.iters.unwrap_or(DEFAULT_ITERATIONS),
        step_size_xy: args.step_xy.unwrap_or(DEFAULT_STEP_XY),
        step_size_theta: args.step_theta.unwrap_or(DEFAULT_STEP_THETA),
        truncation_md: loss_cfg.truncation_md,
        k: loss_cfg.k,
    };
    if args.emit_rasters && args.out.is_none() {
        return Err(Error::Config(
            "--emit-rasters needs --out to hold the images".into(),
        ));
    }

    let trace = run_toy(&initial, &mask, &cfg)?;
    let csv = export::trace_csv(&trace);
    match &args.out {
        None => print!("{csv}"),
        Some(dir) => {
            ensure_dir(dir)?;
            fs::write(dir.join("trace.csv"), &csv)?;

            let last = trace.last();
            let summary = serde_json::json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "toy",
                "scenario": scenario_label,
                "config": {
                    "k": cfg.k,
                    "truncation_md": trajraster::scenario::TruncationSetting::from_option(cfg.truncation_md),
                    "iterations": cfg.iterations,
                    "step_xy": cfg.step_size_xy,
                    "step_theta": cfg.step_size_theta,
                },
                "grid": GridEcho::from(mask.grid()),
                "status": export::status_label(trace.status),
                "initial": { "x": initial.x, "y": initial.y, "theta": initial.theta,
                              "loss": trace.initial().loss },
                "final": { "x": last.state.x, "y": last.state.y, "theta": last.state.theta,
                           "loss": last.loss, "iteration": last.iteration },
            });
            fs::write(
                dir.join("toy_summary.json"),
                serde_json::to_string_pretty(&summary).expect("summary serialization") + "\n",
            )?;

            if args.emit_rasters {
                let every = args.snapshot_every.max(1);
                for p in &trace.points {
                    let is_last = p.iteration == trace.last().iteration;
                    if p.iteration % every != 0 && !is_last {
                        continue;
                    }
                    let raster =
                        rasterize_waypoint(&p.state, mask.grid(), cfg.k, cfg.truncation_md)?;
                    let stem = dir.join(format!("snapshot_{:06}", p.iteration));
                    export::write_raster_with_sidecar(&stem, &raster)?;
                }
            }
        }
    }
    Ok(())
}

pub fn cmd_raster(args: &RasterArgs) -> Result<()> {
    let doc = ScenarioDoc::load(&args.scenario)?;
    let cfg = args.config.resolve(&doc.config);
    let mask = doc.mask();
    ensure_dir(&args.out)?;

    let (w, h, pixels) = export::mask_pixels(&mask);
    export::write_pgm(&args.out.join("mask.pgm"), w, h, &pixels)?;

    let mut files = vec!["mask.pgm".to_string()];
    for actor in &doc.actors {
        for (t, s) in actor.predicted.waypoints().iter().enumerate() {
            let raster = rasterize_waypoint(s, &doc.grid, cfg.k, cfg.truncation_md)?;
            let name = format!("raster_{}_{t:03}", actor.id);
            export::write_raster_with_sidecar(&args.out.join(&name), &raster)?;
            files.push(format!("{name}.pgm"));
        }
    }

    let manifest = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "raster",
        "scenario": args.scenario.display().to_string(),
        "config": ConfigEcho::from(&cfg),
        "grid": GridEcho::from(&doc.grid),
        "files": files,
    });
    fs::write(
        args.out.join("raster_manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serialization") + "\n",
    )?;
    Ok(())
}

/// Template scenario: a full-scale grid with a two-lane drivable band and
/// one actor whose prediction drifts toward the band edge.
pub fn cmd_init(args: &InitArgs) -> Result<()> {
    // 0.16 m cells; 938 × 625 cells ≈ 150 m × 100 m
    let grid = GridSpec::new(150.08, 100.0, 0.16, 0.16, [-75.04, -50.0])?;
    let drivable = PolygonSet::new(vec![Polygon::new(
        vec![[-75.04, -8.0], [75.04, -8.0], [75.04, 8.0], [-75.04, 8.0]],
        vec![],
    )?]);

    let horizon = 30;
    let timestep = 0.1;
    let speed = 8.0; // m/s along +x
    let gt: Vec<WaypointState> = (0..horizon)
        .map(|t| WaypointState::new(-20.0 + speed * timestep * t as f64, 2.0, 4.5, 1.9, 0.0))
        .collect();
    let predicted: Vec<WaypointState> = (0..horizon)
        .map(|t| {
            let t = t as f64;
            // drifts across the band edge over the horizon
            WaypointState::new(
                -20.0 + speed * timestep * t,
                2.0 + 0.3 * timestep * t * speed,
                4.5,
                1.9,
                0.28,
            )
        })
        .collect();

    let doc = ScenarioDoc {
        grid,
        drivable,
        actors: vec![Actor {
            id: "vehicle-0".into(),
            predicted: Trajectory::new(predicted, timestep)?,
            ground_truth: Trajectory::new(gt, timestep)?,
        }],
        config: ConfigOverrides::default(),
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    doc.save(&args.out)?;
    eprintln!("wrote template scenario to {}", args.out.display());
    Ok(())
}
