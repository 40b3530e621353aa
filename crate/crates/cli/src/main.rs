use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chua_core::analysis::{PlaneSettings, DEFAULT_PLANE_HALF_EXTENT};
use chua_core::render::svg::render_svg;
use chua_core::render::{
    fit_camera, frame_file_name, render_frame, render_sweep, sweep_cameras, write_frames, MongePlane, Projection, Scene,
    SceneStyle, SweepAxis, View,
};
use chua_core::scene::{relative_reference, CometLength, PlaybackMode, SceneDocument, TrajectorySource, ViewerDefaults};
use chua_core::trajectory_io::{load_trajectory, save_trajectory, write_atomic, TrajectoryFormat};
use chua_core::{analyze, decimate, integrate, CircuitParams, IntegrationConfig, Rgba, StateVector, Trajectory, DOUBLE_SCROLL};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Fraction of the half-frame left empty around a fitted scene.
const FIT_MARGIN: f64 = 0.05;
/// Points inlined into a scene when no trajectory file is given.
const DEFAULT_INLINE_POINTS: usize = 20_000;

#[derive(Parser)]
#[command(name = "chua", version, about = "Chua's circuit simulation, eigenplane analysis and rendering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the circuit and write a trajectory file.
    Simulate(SimulateArgs),
    /// Report singularities, eigenvalues, eigenplanes and their intersections.
    Analyze(AnalyzeArgs),
    /// Render a projection or an orbit sweep to PPM (and optionally SVG).
    Render(RenderArgs),
    /// Bundle parameters, trajectory, planes and style into a scene file.
    ExportScene(ExportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Parameter file (JSON); defaults to the double-scroll set.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = IntegrationConfig::DEFAULT_DT, value_parser = positive_f64, allow_negative_numbers = true)]
    dt: f64,
    #[arg(long, default_value_t = IntegrationConfig::DEFAULT_STEPS, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// Steps discarded before recording [default: 100000, or 0 when --steps is not larger].
    #[arg(long)]
    skip: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    stride: u64,
    /// Initial state as u1,u2,i.
    #[arg(long, value_parser = parse_state, allow_negative_numbers = true)]
    x0: Option<StateVector>,
    #[arg(long, default_value = "trajectory.bin")]
    out: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Half-extent of each eigenplane rectangle.
    #[arg(long, default_value_t = DEFAULT_PLANE_HALF_EXTENT, value_parser = positive_f64)]
    plane_size: f64,
}

#[derive(Args)]
struct RenderArgs {
    /// Trajectory file (csv or bin); a default run is simulated when neither this nor --scene is given.
    #[arg(long, conflicts_with = "scene")]
    input: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Scene file supplying parameters, trajectory, planes and style.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Decimate the trajectory on load to about this many points.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    max_points: Option<u64>,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Iu1)]
    projection: ProjectionArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    azimuth: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    elevation: f64,
    /// Draw the eigenplane rectangles.
    #[arg(long)]
    planes: bool,
    /// Draw the plane intersection segments.
    #[arg(long)]
    segments: bool,
    /// Overlay g(u1) and the load line (I_U1 and U2_U1 views).
    #[arg(long)]
    iv: bool,
    /// Render an axonometric orbit of N frames instead of a single view.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    sweep: Option<u64>,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    angle_step: f64,
    #[arg(long, value_enum, default_value_t = AxisArg::Horizontal)]
    sweep_axis: AxisArg,
    /// Image size as WxH.
    #[arg(long, default_value = "800x800", value_parser = parse_size)]
    size: (u32, u32),
    #[arg(long, default_value = "frames")]
    out: PathBuf,
    /// Also write frame_NNNNN.svg next to each PPM.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value_t = DEFAULT_PLANE_HALF_EXTENT, value_parser = positive_f64)]
    plane_size: f64,
    #[command(flatten)]
    style: StyleArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Trajectory file to reference; without it a decimated default run is inlined.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PLANE_HALF_EXTENT, value_parser = positive_f64)]
    plane_size: f64,
    /// Comet tail length in points.
    #[arg(long, default_value_t = CometLength::DEFAULT.get())]
    comet: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Continuous)]
    mode: ModeArg,
    /// Playback rate in points per second.
    #[arg(long, default_value_t = ViewerDefaults::default().draw_speed)]
    draw_speed: f64,
    #[arg(long, default_value_t = ViewerDefaults::default().angle_step, allow_negative_numbers = true)]
    angle_step: f64,
    #[arg(long, default_value = "scene.chua-scene.json")]
    out: PathBuf,
    #[command(flatten)]
    style: StyleArgs,
}

/// Style overrides; colours as #rrggbb or #rrggbbaa.
#[derive(Args)]
struct StyleArgs {
    #[arg(long)]
    background: Option<Rgba>,
    #[arg(long)]
    trajectory_color: Option<Rgba>,
    #[arg(long)]
    point_size: Option<u32>,
    #[arg(long)]
    iv_color: Option<Rgba>,
    #[arg(long)]
    load_line_color: Option<Rgba>,
    #[arg(long)]
    line_width: Option<u32>,
    /// Three comma-separated colours for EP+, E0, EP-.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    plane_colors: Option<Vec<Rgba>>,
    #[arg(long)]
    segment_color: Option<Rgba>,
    #[arg(long)]
    segment_width: Option<u32>,
}

impl StyleArgs {
    fn apply(&self, mut s: SceneStyle) -> SceneStyle {
        if let Some(c) = self.background {
            s.background = c;
        }
        if let Some(c) = self.trajectory_color {
            s.trajectory_color = c;
        }
        if let Some(n) = self.point_size {
            s.trajectory_point_size = n;
        }
        if let Some(c) = self.iv_color {
            s.iv_colors[0] = c;
        }
        if let Some(c) = self.load_line_color {
            s.iv_colors[1] = c;
        }
        if let Some(n) = self.line_width {
            s.iv_line_width = n;
        }
        if let Some(cs) = &self.plane_colors {
            s.plane_colors = [cs[0], cs[1], cs[2]];
        }
        if let Some(c) = self.segment_color {
            s.segment_color = c;
        }
        if let Some(n) = self.segment_width {
            s.segment_width = n;
        }
        s
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectionArg {
    Iu1,
    Iu2,
    U2u1,
    Axo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Continuous,
    Sequential,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Horizontal,
    Vertical,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {s}"))
    }
}

fn parse_state(s: &str) -> Result<StateVector, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected u1,u2,i".into());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|e| format!("{p}: {e}"))?;
    }
    StateVector::checked(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    Ok((w.trim().parse().map_err(|e| format!("{e}"))?, h.trim().parse().map_err(|e| format!("{e}"))?))
}

fn load_params(path: &Option<PathBuf>) -> Result<CircuitParams> {
    match path {
        Some(p) => Ok(CircuitParams::load(p)?),
        None => Ok(DOUBLE_SCROLL),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let params = load_params(&args.params)?;
    let skip = args.skip.unwrap_or(if args.steps > IntegrationConfig::DEFAULT_SKIP { IntegrationConfig::DEFAULT_SKIP } else { 0 });
    let config = IntegrationConfig {
        dt: args.dt,
        n_steps: args.steps,
        transient_skip: skip,
        record_stride: args.stride,
        initial: args.x0.unwrap_or(IntegrationConfig::DEFAULT_INITIAL),
    };
    let traj = integrate(&params, &config)?;
    let format = match args.format {
        Some(FormatArg::Csv) => TrajectoryFormat::Csv,
        Some(FormatArg::Bin) => TrajectoryFormat::Bin,
        None => TrajectoryFormat::from_extension(&args.out).unwrap_or(TrajectoryFormat::Bin),
    };
    save_trajectory(&traj, &args.out, format).with_context(|| format!("writing {}", args.out.display()))?;
    println!("points: {}", traj.len());
    match traj.bounds() {
        Some(b) => println!("bbox: min={} max={}", b.min, b.max),
        None => println!("bbox: empty"),
    }
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let params = load_params(&args.params)?;
    let settings = PlaneSettings { half_width: args.plane_size, half_length: args.plane_size, ..Default::default() };
    let report = analyze(&params, &settings)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    if report.singularities.is_empty() {
        bail!("no singularity could be analyzed");
    }
    Ok(())
}

fn default_run(params: &CircuitParams) -> Result<Trajectory> {
    Ok(integrate(params, &IntegrationConfig::default())?)
}

fn render(args: RenderArgs) -> Result<()> {
    let max_points = args.max_points.map(|n| n as usize);
    let (params, traj, style, doc) = match &args.scene {
        Some(path) => {
            let doc = SceneDocument::load(path).with_context(|| format!("loading {}", path.display()))?;
            let traj = doc.load_trajectory(path, max_points)?;
            (doc.params, traj, doc.style.clone(), Some(doc))
        }
        None => {
            let params = load_params(&args.params)?;
            let traj = match &args.input {
                Some(p) => load_trajectory(p, max_points).with_context(|| format!("reading {}", p.display()))?,
                None => {
                    let t = default_run(&params)?;
                    match max_points {
                        Some(n) => decimate(&t, n)?,
                        None => t,
                    }
                }
            };
            (params, traj, SceneStyle::default(), None)
        }
    };
    let style = args.style.apply(style);

    let (planes, segments) = if args.planes || args.segments {
        match &doc {
            Some(d) if !d.planes.is_empty() => (d.planes.clone(), d.segments.clone()),
            _ => {
                let settings =
                    PlaneSettings { half_width: args.plane_size, half_length: args.plane_size, colors: style.plane_colors };
                let report = analyze(&params, &settings)?;
                let segs = report.intersection_segments();
                (report.planes, segs)
            }
        }
    } else {
        (Vec::new(), Vec::new())
    };
    let states: Vec<StateVector> = traj.states().collect();
    let scene = Scene {
        params: &params,
        trajectory: &states,
        planes: if args.planes { &planes } else { &[] },
        segments: if args.segments { &segments } else { &[] },
        iv_overlay: args.iv,
    };
    let fitted = fit_camera(&scene, args.size, FIT_MARGIN);
    let camera = fitted.with_angles(args.azimuth, args.elevation)?;

    let (views, frames) = match args.sweep {
        Some(n) => {
            let axis = match args.sweep_axis {
                AxisArg::Horizontal => SweepAxis::Horizontal,
                AxisArg::Vertical => SweepAxis::Vertical,
            };
            let n = n as usize;
            let frames = render_sweep(&scene, &camera, &style, args.size, args.angle_step, n, axis)?;
            let views: Vec<View> = sweep_cameras(&camera, args.angle_step, n, axis)?
                .into_iter()
                .map(|camera| View { projection: Projection::Axonometric, camera })
                .collect();
            (views, frames)
        }
        None => {
            let projection = match args.projection {
                ProjectionArg::Iu1 => Projection::Monge(MongePlane::IU1),
                ProjectionArg::Iu2 => Projection::Monge(MongePlane::IU2),
                ProjectionArg::U2u1 => Projection::Monge(MongePlane::U2U1),
                ProjectionArg::Axo => Projection::Axonometric,
            };
            let view = View { projection, camera };
            let frame = render_frame(&scene, &view, &style, args.size)?;
            (vec![view], vec![frame])
        }
    };
    let paths = write_frames(&args.out, &frames)?;
    if args.svg {
        for (k, view) in views.iter().enumerate() {
            let svg = render_svg(&scene, view, &style, args.size)?;
            let path = args.out.join(frame_file_name(k, "svg"));
            write_atomic(&path, |f| std::io::Write::write_all(f, svg.as_bytes()))?;
        }
    }
    println!("frames: {} in {}", paths.len(), args.out.display());
    Ok(())
}

fn export_scene(args: ExportArgs) -> Result<()> {
    let params = load_params(&args.params)?;
    let comet = CometLength::new(args.comet)?;
    let viewer = ViewerDefaults {
        mode: match args.mode {
            ModeArg::Continuous => PlaybackMode::Continuous,
            ModeArg::Sequential => PlaybackMode::Sequential,
        },
        comet_length: comet,
        draw_speed: args.draw_speed,
        angle_step: args.angle_step,
    };
    let style = args.style.apply(SceneStyle::default());
    let settings = PlaneSettings { half_width: args.plane_size, half_length: args.plane_size, colors: style.plane_colors };
    let report = analyze(&params, &settings)?;
    let source = match &args.trajectory {
        Some(p) => {
            let format = TrajectoryFormat::detect(p).with_context(|| format!("reading {}", p.display()))?;
            TrajectorySource::File { path: relative_reference(&args.out, p), format }
        }
        None => TrajectorySource::inline(&decimate(&default_run(&params)?, DEFAULT_INLINE_POINTS)?),
    };
    let doc = SceneDocument::from_analysis(&report, source, style, viewer);
    doc.save(&args.out)?;
    println!("scene: {}", args.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Render(a) => render(a),
        Command::ExportScene(a) => export_scene(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
