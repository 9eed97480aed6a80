use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use contact_sysid::curriculum::FailureHistogram;
use contact_sysid::randomization::{
    apply_observation_noise, assign_surface_params, observation_noise_sigma, sample_ball_placement,
    sample_dr, sample_goal, Surface,
};
use contact_sysid::reward::{read_trace, write_rewards, EpisodeScorer, KickEvent, Leg, Stage};
use contact_sysid::sysid;
use contact_sysid::trajectory::average_repeats;
use contact_sysid::{
    seeded_rng, simulate_drop, simulate_roll, ContactParams, Error, Result, Trajectory, TrajectoryKind,
};
use serde::Deserialize;

use crate::config::RunConfig;
use crate::{
    Experiment, IdentifyArgs, LegArg, Preset, ReplayArgs, RewardEvalArgs, SampleArgs, Sampler,
    SimulateArgs, StageArg,
};

pub struct Context {
    pub cfg: RunConfig,
    pub verbose: bool,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| invalid(format!("{what} is stochastic: pass --seed")))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn write_trajectory(t: &Trajectory, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    t.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn simulate(ctx: &Context, a: SimulateArgs) -> Result<()> {
    let params = match (a.preset, &a.params) {
        (Some(Preset::HardGround), _) => ContactParams::HARD_GROUND,
        (Some(Preset::Grass), _) => ContactParams::GRASS,
        (None, Some(path)) => serde_json::from_reader(open(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        (None, None) => return Err(invalid("pass --params or --preset")),
    };
    let sim = match a.dt {
        Some(dt) => ctx.cfg.sim.with_sample_interval(dt),
        None => ctx.cfg.sim,
    };
    let clean = match a.experiment {
        Experiment::Drop => {
            if a.v0.is_some() {
                return Err(invalid("--v0 applies to roll experiments"));
            }
            let h0 = a.h0.ok_or_else(|| invalid("drop experiments need --h0"))?;
            simulate_drop(&params, &ctx.cfg.ball, h0, &sim, a.samples)?
        }
        Experiment::Roll => {
            if a.h0.is_some() {
                return Err(invalid("--h0 applies to drop experiments"));
            }
            let v0 = a.v0.ok_or_else(|| invalid("roll experiments need --v0"))?;
            simulate_roll(&params, &ctx.cfg.ball, v0, &sim, a.samples)?
        }
    };
    if !(a.noise.is_finite() && a.noise >= 0.0) {
        return Err(invalid(format!("--noise must be non-negative, got {}", a.noise)));
    }
    let mut rng = if a.noise > 0.0 {
        Some(seeded_rng(require_seed(a.seed, "measurement noise")?))
    } else {
        None
    };
    let mut noisy = |t: &Trajectory| match rng.as_mut() {
        Some(r) => t.with_measurement_noise(a.noise, r),
        None => Ok(t.clone()),
    };
    match a.repeats {
        None => write_trajectory(&noisy(&clean)?, &a.out)?,
        Some(0) => return Err(invalid("--repeats must be at least 1")),
        Some(k) => {
            let replicas = (0..k).map(|_| noisy(&clean)).collect::<Result<Vec<_>>>()?;
            for (i, r) in replicas.iter().enumerate() {
                write_trajectory(r, &sibling(&a.out, &format!("rep{}", i + 1)))?;
            }
            write_trajectory(&average_repeats(&replicas)?.mean, &sibling(&a.out, "mean"))?;
        }
    }
    if ctx.verbose {
        eprintln!("simulated {} samples at dt={} s", clean.len(), clean.dt);
    }
    Ok(())
}

pub fn identify(ctx: &Context, a: IdentifyArgs) -> Result<()> {
    let drop = Trajectory::read_csv(open(&a.drop)?, TrajectoryKind::DropHeight)?;
    let roll = Trajectory::read_csv(open(&a.roll)?, TrajectoryKind::RollDisplacement)?;
    let mut cfg = ctx.cfg.sysid.clone();
    cfg.seed = require_seed(a.seed, "identification")?;
    if let Some(t) = a.tolerance {
        cfg.tolerance = t;
    }
    if let Some(g) = a.max_generations {
        cfg.max_generations = g;
    }
    if let Some(p) = a.population_size {
        cfg.population_size = p;
    }
    let h0 = a.h0.unwrap_or(drop.values[0]);
    let result = sysid::identify(&drop, &roll, &cfg, &ctx.cfg.ball, &ctx.cfg.sim, h0, a.v0)?;
    let mut w = create(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &result)?;
    writeln!(w)?;
    w.flush()?;
    if ctx.verbose {
        let p = result.best_params;
        eprintln!(
            "loss {:.3e} after {} generations ({:?}): e={:.4} mu_s={:.4} mu_d={:.4} c={:.4} c_a={:.4}",
            result.best_loss,
            result.generations_used,
            result.terminated_by,
            p.restitution,
            p.static_friction,
            p.dynamic_friction,
            p.linear_damping,
            p.angular_damping
        );
    }
    Ok(())
}

fn load_histogram(ctx: &Context, path: Option<&Path>) -> Result<FailureHistogram> {
    let c = &ctx.cfg.curriculum;
    let h = match path {
        Some(p) => FailureHistogram::read_csv(open(p)?)?,
        None => FailureHistogram::new(c.motions, c.bins)?,
    };
    h.with_smoothing(c.smoothing_alpha)?.with_decay(c.decay)
}

pub fn sample(ctx: &Context, a: SampleArgs) -> Result<()> {
    let mut rng = seeded_rng(require_seed(a.seed, "sampling")?);
    if a.n == 0 {
        return Err(invalid("-n must be positive"));
    }
    let cfg = &ctx.cfg;
    let mut w = csv::Writer::from_writer(create(&a.out)?);
    let row = |w: &mut csv::Writer<_>, values: &[f64]| -> Result<()> {
        w.write_record(values.iter().map(f64::to_string))?;
        Ok(())
    };
    match a.which {
        Sampler::Dr => {
            cfg.dr.validate()?;
            w.write_record(cfg.dr.terms.iter().map(|t| t.name.as_str()))?;
            for _ in 0..a.n {
                let s = sample_dr(&cfg.dr, &mut rng)?;
                row(&mut w, &s.values.iter().map(|(_, v)| *v).collect::<Vec<_>>())?;
            }
        }
        Sampler::Noise => {
            let obs = &cfg.probes.observation;
            let sigma = observation_noise_sigma(obs, &cfg.noise);
            w.write_record(["x", "y", "z", "sigma"])?;
            for _ in 0..a.n {
                let p = apply_observation_noise(obs, &cfg.noise, &mut rng)?.position;
                row(&mut w, &[p[0], p[1], p[2], sigma])?;
            }
        }
        Sampler::Placement => {
            w.write_record(["x", "y", "vx", "vy", "angle", "radius"])?;
            for _ in 0..a.n {
                let b = sample_ball_placement(
                    cfg.probes.nominal_ball_position,
                    cfg.probes.nominal_ball_direction,
                    &cfg.placement,
                    &mut rng,
                )?;
                row(
                    &mut w,
                    &[b.position[0], b.position[1], b.velocity[0], b.velocity[1], b.angle, b.radius],
                )?;
            }
        }
        Sampler::Goal => {
            w.write_record(["x", "y"])?;
            for _ in 0..a.n {
                row(&mut w, &sample_goal(&cfg.placement, &mut rng)?)?;
            }
        }
        Sampler::Curriculum => {
            let h = load_histogram(ctx, a.histogram.as_deref())?;
            w.write_record(["motion", "phase"])?;
            for _ in 0..a.n {
                let (m, phase) = h.sample_start(&mut rng)?;
                w.write_record([m.to_string(), phase.to_string()])?;
            }
        }
        Sampler::Surface => {
            let envs = assign_surface_params(
                a.n,
                &ContactParams::HARD_GROUND,
                &ContactParams::GRASS,
                cfg.probes.surface_std,
                &cfg.sysid.bounds,
                &mut rng,
            )?;
            let mut header = vec!["env", "surface"];
            header.extend(contact_sysid::params::PARAM_NAMES);
            w.write_record(&header)?;
            for (i, e) in envs.iter().enumerate() {
                let surface = match e.surface {
                    Surface::HardGround => "hard-ground",
                    Surface::Grass => "grass",
                };
                let mut rec = vec![i.to_string(), surface.to_string()];
                rec.extend(e.params.to_array().iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    if ctx.verbose {
        eprintln!("wrote {} samples to {}", a.n, a.out.display());
    }
    Ok(())
}

pub fn reward_eval(ctx: &Context, a: RewardEvalArgs) -> Result<()> {
    let frames = read_trace(open(&a.trace)?)?;
    let stage = match a.stage {
        StageArg::I => Stage::I,
        StageArg::II => Stage::II,
    };
    let leg = match a.leg {
        Some(LegArg::Left) => Leg::Left,
        Some(LegArg::Right) => Leg::Right,
        None => ctx.cfg.kick.labeled_leg,
    };
    let target = match a.target.as_deref() {
        Some([x, y, z]) => [*x, *y, *z],
        Some(_) => return Err(invalid("--target takes three components")),
        None => ctx.cfg.kick.target_direction,
    };
    let event = KickEvent::new(leg, target, ctx.cfg.reward.min_speed_threshold)?;
    let mut scorer = EpisodeScorer::new(ctx.cfg.reward.clone(), stage, event)?;
    let rewards = scorer.score_all(&frames)?;
    let mut w = create(&a.out)?;
    write_rewards(&rewards, &mut w)?;
    w.flush()?;
    if ctx.verbose {
        let total: f64 = rewards.iter().map(|r| r.total).sum();
        eprintln!("scored {} frames, episode return {total}", rewards.len());
    }
    Ok(())
}

#[derive(Deserialize)]
struct Failure {
    motion: usize,
    phase: f64,
}

pub fn curriculum_replay(ctx: &Context, a: ReplayArgs) -> Result<()> {
    let mut h = load_histogram(ctx, a.histogram.as_deref())?;
    if let Some(d) = a.decay {
        h = h.with_decay(d)?;
    }
    let mut r = csv::Reader::from_reader(open(&a.failures)?);
    let mut n = 0;
    for rec in r.deserialize::<Failure>() {
        let f = rec?;
        h.record_failure(f.motion, h.bin_of(f.phase)?)?;
        n += 1;
    }
    let mut w = create(&a.out)?;
    h.write_csv(&mut w)?;
    w.flush()?;
    if let Some(path) = &a.probabilities {
        let p = h.probabilities()?;
        let mut pw = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
        for row in p.chunks(h.bins()) {
            pw.write_record(row.iter().map(f64::to_string))?;
        }
        pw.flush()?;
    }
    if ctx.verbose {
        eprintln!("replayed {n} failures into a {}x{} histogram", h.motions(), h.bins());
    }
    Ok(())
}
