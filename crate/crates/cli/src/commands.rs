use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use scds::baselines::DEFAULT_KMEANS_ITERATIONS;
use scds::dominant_sets::DEFAULT_MAX_ITERATIONS;
use scds::sweep::{DEFAULT_EPSILONS, DEFAULT_THETAS};
use scds::{
    build_affinity, eigengap_estimate, evaluate as score, kmeans_cosine, load_embeddings,
    peel_clusters, run_sweep, save_embeddings, synth_embeddings, AffinityError, AffinityMatrix,
    BaselineError, Clustering, EmbeddingFormat, EmbeddingSet, GroundTruth, KMeansConfig,
    MetricsError, SolverConfig, SolverError, SweepAxes, SweepError, SynthConfig,
};

use crate::error::{CliError, Stage};
use crate::output::write_output;
use crate::{Algorithm, ClusterArgs, EstimateArgs, EvaluateArgs, SweepArgs, SynthArgs};

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::user(Stage::Io, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<EmbeddingSet, CliError> {
    load_embeddings(open(path)?, EmbeddingFormat::Csv)
        .map_err(|e| CliError::user(Stage::Parse, format!("{}: {e}", path.display())))
}

fn labeled(set: &EmbeddingSet, path: &Path) -> Result<GroundTruth, CliError> {
    set.truth().ok_or_else(|| {
        CliError::user(
            Stage::Parse,
            format!(
                "{}: the label column is empty; ground truth is required",
                path.display()
            ),
        )
    })
}

fn affinity(set: &EmbeddingSet, knn: usize) -> Result<AffinityMatrix, CliError> {
    build_affinity(set, knn).map_err(|e| match e {
        AffinityError::ZeroKnn | AffinityError::TooFewItems(_) => {
            CliError::user(Stage::Affinity, e)
        }
        _ => CliError::internal(Stage::Affinity, e),
    })
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::InvalidConfig(_) => CliError::user(Stage::Solver, e),
        _ => CliError::internal(Stage::Solver, e),
    }
}

fn baseline_error(e: BaselineError) -> CliError {
    CliError::user(Stage::Solver, e)
}

fn metrics_error(e: MetricsError) -> CliError {
    match e {
        MetricsError::Labeling(_) | MetricsError::TooFewItems(_) => {
            CliError::user(Stage::Labeling, e)
        }
        _ => CliError::internal(Stage::Labeling, e),
    }
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let config = SynthConfig {
        rotate: args.rotate,
        ..SynthConfig::new(args.clusters, args.points, args.dim, args.noise, args.seed)
    };
    let set = synth_embeddings(&config).map_err(|e| CliError::user(Stage::Parse, e))?;
    write_output(args.output.as_deref(), |w| {
        save_embeddings(&set, w).map_err(std::io::Error::other)
    })?;
    eprintln!("n={} m={} clusters={}", set.len(), set.dim(), args.clusters);
    Ok(())
}

pub fn cluster(args: ClusterArgs) -> Result<(), CliError> {
    // Reject bad flag combinations before anything is read or written.
    let ds_config = match args.algorithm {
        Algorithm::Ds => {
            if args.k.is_some() || args.k_from.is_some() {
                return Err(CliError::user(
                    Stage::Parse,
                    "--k and --k-from only apply to --algorithm kmeans",
                ));
            }
            let config = SolverConfig::new(
                args.theta,
                args.epsilon,
                args.max_iters.unwrap_or(DEFAULT_MAX_ITERATIONS),
            )
            .map_err(solver_error)?;
            Some(config)
        }
        Algorithm::Kmeans => {
            if args.k.is_none() && args.k_from.is_none() {
                return Err(CliError::user(
                    Stage::Parse,
                    "k required for kmeans (pass --k or --k-from eigengap)",
                ));
            }
            None
        }
    };

    let set = load(&args.input)?;
    let needs_affinity =
        ds_config.is_some() || args.k_from.is_some() || args.dump_affinity.is_some();
    let a = if needs_affinity {
        Some(affinity(&set, args.knn)?)
    } else {
        None
    };

    let clustering = match (ds_config, a.as_ref()) {
        (Some(config), Some(a)) => peel_clusters(a, &config).map_err(solver_error)?,
        _ => {
            let k = match (args.k, a.as_ref()) {
                (Some(k), _) => k,
                (None, Some(a)) => {
                    let k = eigengap_estimate(a).map_err(baseline_error)?;
                    eprintln!("estimated k={k}");
                    k
                }
                (None, None) => unreachable!("checked above"),
            };
            let config = KMeansConfig {
                k,
                max_iterations: args.max_iters.unwrap_or(DEFAULT_KMEANS_ITERATIONS),
                n_restarts: args.restarts,
                seed: args.seed,
            };
            kmeans_cosine(&set, &config).map_err(baseline_error)?
        }
    };
    clustering
        .validate()
        .map_err(|e| CliError::internal(Stage::Solver, e))?;

    if let (Some(path), Some(a)) = (args.dump_affinity.as_deref(), a.as_ref()) {
        write_output(Some(path), |w| a.write_csv(w))?;
    }
    write_output(args.output.as_deref(), |w| clustering.write_json(&set, w))?;

    let iterations: usize = match args.algorithm {
        Algorithm::Ds => clustering.clusters.iter().map(|c| c.iterations).sum(),
        Algorithm::Kmeans => clustering.clusters.first().map_or(0, |c| c.iterations),
    };
    eprintln!(
        "n={} m={} n_clusters={} iterations={}",
        set.len(),
        set.dim(),
        clustering.len(),
        iterations
    );
    let unconverged = clustering.clusters.iter().filter(|c| !c.converged).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} cluster(s) hit the iteration cap");
    }
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let set = load(&args.input)?;
    let truth = labeled(&set, &args.input)?;
    let (path, clustering) = match (&args.clusters, &args.assignments) {
        (Some(p), _) => (p, Clustering::read_json(open(p)?, &set)),
        (None, Some(p)) => (p, Clustering::read_external_csv(open(p)?, &set)),
        (None, None) => unreachable!("clap requires one source"),
    };
    let clustering =
        clustering.map_err(|e| CliError::user(Stage::Parse, format!("{}: {e}", path.display())))?;
    let report = score(&clustering, &truth, args.labeling.into()).map_err(metrics_error)?;
    write_output(args.output.as_deref(), |w| {
        if args.csv {
            writeln!(w, "{}", report.csv_row())
        } else {
            serde_json::to_writer_pretty(&mut *w, &report.to_json(&truth))?;
            writeln!(w)
        }
    })
}

pub fn estimate_k(args: EstimateArgs) -> Result<(), CliError> {
    let set = load(&args.input)?;
    let a = affinity(&set, args.knn)?;
    let k = eigengap_estimate(&a).map_err(baseline_error)?;
    write_output(args.output.as_deref(), |w| writeln!(w, "{k}"))
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let set = load(&args.input)?;
    labeled(&set, &args.input)?;
    let axes = SweepAxes::new(
        args.thetas.unwrap_or_else(|| DEFAULT_THETAS.to_vec()),
        args.epsilons.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec()),
    )
    .map_err(|e| CliError::user(Stage::Parse, e))?;
    if args.max_iters == 0 {
        return Err(CliError::user(Stage::Parse, "--max-iters must be positive"));
    }
    let grid = run_sweep(&set, &axes, args.knn, args.labeling.into(), args.max_iters).map_err(
        |e| match e {
            SweepError::Affinity(e) => CliError::user(Stage::Affinity, e),
            SweepError::Solver(e) => solver_error(e),
            SweepError::Metrics(e) => metrics_error(e),
            SweepError::Unlabeled | SweepError::InvalidGrid(_) => CliError::user(Stage::Parse, e),
        },
    )?;
    write_output(args.output.as_deref(), |w| grid.write_csv(w))?;
    eprintln!("n={} m={} cells={}", set.len(), set.dim(), grid.rows.len());
    Ok(())
}
