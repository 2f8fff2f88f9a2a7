use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vizing_sos::certify::{
    certificate_residual, gram_residual, gram_to_polys, parse_gram_certificate,
    parse_poly_certificate, verify_certificate, verify_gram, write_gram_certificate,
    write_poly_certificate,
};
use vizing_sos::families::{ansatz_conj54, family_certificate, AnsatzOutcome, FamilyId};
use vizing_sos::groebner::{
    read_gb, reduced_monomials, write_gb, GbCache, GroebnerBasis, DEFAULT_STEP_BUDGET,
};
use vizing_sos::model::{build_fstar_in, build_ideal_sos_in};
use vizing_sos::oracle::{check_bijection, check_conjecture_class, enumerate_class};
use vizing_sos::pipeline::{round_solution, run_pipeline, ObjectiveChoice, PipelineConfig, Stage};
use vizing_sos::sdp::{
    build_sdp, export_heatmap, export_sdpa, read_matrix_csv, solve, spectral_factor, suggest_mask,
    write_matrix_csv, MonomialMask, SdpStatus, SolverSettings,
};
use vizing_sos::{GraphClassParams, IdealBasis, MonomialOrder, VarTable};

#[derive(Parser)]
#[command(
    name = "vizing-sos",
    version,
    about = "Sum-of-squares certificates for domination inequalities on product graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the ideal I_sos and the target f*.
    Ideal {
        #[arg(long)]
        params: GraphClassParams,
        /// Directory for ideal.txt and fstar.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced Gröbner basis of I_sos, cached by content digest.
    Groebner {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also list the number of standard monomials up to this degree.
        #[arg(long)]
        ell: Option<u32>,
    },
    /// Build and solve the degree-ell Gram problem.
    Sdp(SdpArgs),
    /// Round a numeric solution to an exact Gram certificate.
    Round(RoundArgs),
    /// Verify a Gram or sum-of-squares certificate exactly.
    Verify {
        /// Certificate file written by `round` or `family`.
        cert: PathBuf,
        #[arg(long, default_value = ".cache/gb")]
        cache: PathBuf,
    },
    /// Closed-form certificates and the degree-j ansatz search.
    Family {
        /// thm46, thm51, thm52 or conj54:J.
        #[arg(long)]
        id: FamilyId,
        #[arg(long)]
        params: GraphClassParams,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 99)]
        max_den: u64,
    },
    /// Brute-force ground truth over the variety.
    Oracle {
        #[arg(long)]
        params: GraphClassParams,
        /// Skip the bijection check.
        #[arg(long)]
        no_bijection: bool,
    },
    /// Run all stages from a config file.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        params: Option<GraphClassParams>,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        objective: Option<ObjectiveChoice>,
        #[arg(long)]
        until: Option<Stage>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print or check pipeline configs.
    Config {
        #[arg(long)]
        defaults: bool,
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    #[arg(long, required_unless_present = "ideal")]
    params: Option<GraphClassParams>,
    /// Ideal file written by `ideal`.
    #[arg(long, conflicts_with = "params")]
    ideal: Option<PathBuf>,
    #[arg(long, default_value = ".cache/gb")]
    cache: PathBuf,
}

impl Source {
    fn ideal(&self) -> Result<IdealBasis> {
        match (&self.ideal, self.params) {
            (Some(path), _) => Ok(IdealBasis::parse(&read(path)?)?),
            (None, Some(p)) => Ok(build_ideal_sos_in(&Arc::new(VarTable::new(p)))),
            (None, None) => bail!("--params or --ideal is required"),
        }
    }
}

#[derive(Args)]
struct Problem {
    #[arg(long)]
    params: GraphClassParams,
    #[arg(long)]
    ell: u32,
    /// Basis mask, one monomial per line.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// zero, trace-min, trace-max, cross-row or custom:FILE.
    #[arg(long, default_value = "zero")]
    objective: ObjectiveChoice,
    /// Gröbner basis file; computed through the cache otherwise.
    #[arg(long)]
    gb: Option<PathBuf>,
    #[arg(long, default_value = ".cache/gb")]
    cache: PathBuf,
}

#[derive(Args)]
struct SdpArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Directory for x.csv and basis.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    export_sdpa: Option<PathBuf>,
    /// Heatmap prefix; writes PREFIX.csv and PREFIX.pgm.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    eig_tol: f64,
    /// Write the suggested mask here.
    #[arg(long)]
    suggest_mask: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    col_tol: f64,
}

#[derive(Args)]
struct RoundArgs {
    #[command(flatten)]
    problem: Problem,
    /// Solution written by `sdp`.
    #[arg(long)]
    x: PathBuf,
    #[arg(long, default_value_t = 99)]
    max_den: u64,
    #[arg(long, default_value_t = 40)]
    project_max_dim: usize,
    #[arg(long, default_value = "gram_certificate.txt")]
    out: PathBuf,
    /// Also write the factored sum-of-squares form.
    #[arg(long)]
    polys: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json"));
}

fn groebner_for(
    params: GraphClassParams,
    gb: Option<&Path>,
    cache: &Path,
) -> Result<GroebnerBasis> {
    if let Some(path) = gb {
        return Ok(read_gb(path)?);
    }
    let ideal = build_ideal_sos_in(&Arc::new(VarTable::new(params)));
    Ok(GbCache::new(cache)
        .get_or_compute(&ideal, MonomialOrder::Grevlex, DEFAULT_STEP_BUDGET)?
        .0)
}

fn build_problem(
    p: &Problem,
) -> Result<(
    GroebnerBasis,
    vizing_sos::Polynomial,
    vizing_sos::sdp::SdpProblem,
)> {
    let gb = groebner_for(p.params, p.gb.as_deref(), &p.cache)?;
    let vars = gb.vars().clone();
    let fstar = build_fstar_in(&vars);
    let full = reduced_monomials(&gb, p.ell)?;
    let mask = match &p.mask {
        Some(path) => Some(MonomialMask::parse(&read(path)?, &full, &vars)?),
        None => None,
    };
    let objective = p.objective.load(&vars, &full).map_err(anyhow::Error::msg)?;
    let problem = build_sdp(&gb, &fstar, p.ell, mask.as_ref(), &objective)?;
    Ok((gb, fstar, problem))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Ideal { params, out } => {
            let vars = Arc::new(VarTable::new(params));
            let ideal = build_ideal_sos_in(&vars);
            let fstar = build_fstar_in(&vars);
            match out {
                Some(dir) => {
                    write(&dir.join("ideal.txt"), &ideal.to_text())?;
                    write(&dir.join("fstar.txt"), &format!("{}\n", fstar.to_text()))?;
                    print(
                        json!({"generators": ideal.len(), "variables": vars.len(), "digest": ideal.digest()}),
                    );
                }
                None => print!("{}", ideal.to_text()),
            }
            Ok(true)
        }
        Command::Groebner { source, out, ell } => {
            let ideal = source.ideal()?;
            let cache = GbCache::new(&source.cache);
            let (gb, hit) =
                cache.get_or_compute(&ideal, MonomialOrder::Grevlex, DEFAULT_STEP_BUDGET)?;
            if let Some(path) = &out {
                write_gb(path, &gb)?;
            }
            let standard = match ell {
                Some(l) => Some(reduced_monomials(&gb, l)?.len()),
                None => None,
            };
            print(json!({
                "size": gb.len(),
                "cached": hit,
                "cache_file": cache.path_for(&ideal, MonomialOrder::Grevlex),
                "reduced_monomials": standard,
            }));
            Ok(true)
        }
        Command::Sdp(a) => {
            if !(a.tol > 0.0 && a.eig_tol > 0.0 && a.col_tol > 0.0) {
                bail!("tolerances must be positive");
            }
            let (_, _, problem) = build_problem(&a.problem)?;
            if let Some(path) = &a.export_sdpa {
                write(path, &export_sdpa(&problem))?;
            }
            let sol = solve(
                &problem,
                &SolverSettings {
                    tol: a.tol,
                    max_iter: a.max_iter,
                },
            )?;
            fs::create_dir_all(&a.out)?;
            let names = problem.basis_names();
            write(&a.out.join("basis.txt"), &(names.join("\n") + "\n"))?;
            let mut report = json!({
                "basis": problem.p(),
                "constraints": problem.num_constraints(),
                "status": sol.status,
                "iterations": sol.iterations,
                "primal_residual": sol.primal_residual,
                "dual_residual": sol.dual_residual,
                "gap": sol.gap,
            });
            if sol.status == SdpStatus::Feasible {
                write_matrix_csv(&a.out.join("x.csv"), &sol.x, Some(&names))?;
                let factor = spectral_factor(&sol.x, a.eig_tol)?;
                report["rank"] = json!(factor.rank());
                if let Some(prefix) = &a.heatmap {
                    let (csv, pgm) = export_heatmap(&factor, &names, prefix)?;
                    report["heatmap"] = json!([csv, pgm]);
                }
                if let Some(path) = &a.suggest_mask {
                    let vars = problem.vars().clone();
                    let mask = suggest_mask(&factor, a.col_tol, problem.basis());
                    write(path, &mask.to_text(problem.basis(), &vars))?;
                    report["suggested_mask"] = json!(mask.len());
                }
            } else if sol.status == SdpStatus::Infeasible {
                report["suggestion"] = json!(format!("increase ell to {}", a.problem.ell + 1));
            }
            print(report);
            Ok(sol.status == SdpStatus::Feasible)
        }
        Command::Round(a) => {
            let (gb, fstar, problem) = build_problem(&a.problem)?;
            let x = read_matrix_csv(&a.x, true)?;
            if x.nrows() != problem.p() {
                bail!(
                    "{} is {}×{}, the problem basis has {} entries",
                    a.x.display(),
                    x.nrows(),
                    x.ncols(),
                    problem.p()
                );
            }
            let settings = SolverSettings::default();
            let r = round_solution(
                &problem,
                &x,
                &gb,
                &fstar,
                a.max_den,
                a.project_max_dim,
                &settings,
            )?;
            write_gram_certificate(&a.out, &r.gram, a.problem.params)?;
            let mut report = json!({"psd": r.gram.witness().is_ok(), "projected": r.projected, "face_dim": r.face_dim, "exact": r.exact});
            if let Some(path) = &a.polys {
                match gram_to_polys(&r.gram, a.problem.ell) {
                    Ok(polys) => {
                        write_poly_certificate(path, &polys, a.problem.params)?;
                        report["summands"] = json!(polys.len());
                    }
                    Err(e) => report["factor_error"] = json!(e.to_string()),
                }
            }
            print(report);
            Ok(r.exact)
        }
        Command::Verify { cert, cache } => {
            let text = read(&cert)?;
            let ok = if text.starts_with("# gram certificate") {
                let (params, gram) = parse_gram_certificate(&text)?;
                let gb = groebner_for(params, None, &cache)?;
                let fstar = build_fstar_in(gb.vars());
                let ok = verify_gram(&gram, &gb, &fstar);
                let residual = gram_residual(&gram, &gb, &fstar)
                    .map(|r| r.to_text())
                    .unwrap_or_else(|e| e.to_string());
                print(
                    json!({"kind": "gram", "params": params.to_string(), "verified": ok, "residual": residual}),
                );
                ok
            } else {
                let (params, polys) = parse_poly_certificate(&text)?;
                let gb = groebner_for(params, None, &cache)?;
                let fstar = build_fstar_in(gb.vars());
                let ok = verify_certificate(&polys, &gb, &fstar);
                let residual = certificate_residual(&polys, &gb, &fstar)
                    .map(|r| r.head(8))
                    .unwrap_or_else(|e| e.to_string());
                print(
                    json!({"kind": "sos", "params": params.to_string(), "verified": ok, "residual": residual}),
                );
                ok
            };
            Ok(ok)
        }
        Command::Family {
            id,
            params,
            verify,
            out,
            max_den,
        } => {
            if let FamilyId::Conj54(j) = id {
                let outcome = ansatz_conj54(j, params, max_den)?;
                if let (Some(path), AnsatzOutcome::Candidate { gram, .. }) = (&out, &outcome) {
                    write_gram_certificate(path, gram, params)?;
                }
                let report = outcome.report();
                print(serde_json::to_value(report)?);
                return Ok(!verify || report.verified);
            }
            let cert = family_certificate(id, params)?;
            if let Some(path) = &out {
                write_poly_certificate(path, &cert, params)?;
            }
            let mut report = json!({"family": id.to_string(), "params": params.to_string(), "summands": cert.len()});
            let mut ok = true;
            if verify {
                let gb = groebner_for(params, None, Path::new(".cache/gb"))?;
                ok = verify_certificate(&cert, &gb, &build_fstar_in(gb.vars()));
                report["verified"] = json!(ok);
            }
            print(report);
            Ok(ok)
        }
        Command::Oracle {
            params,
            no_bijection,
        } => {
            let vars = VarTable::new(params);
            let check = check_conjecture_class(params)?;
            let mut report = json!({
                "params": params.to_string(),
                "class_g": enumerate_class(params.n_g, params.k_g)?.len(),
                "class_h": enumerate_class(params.n_h, params.k_h)?.len(),
                "variety_points": check.points,
                "min_fstar": check.min,
                "witness": check.witness.to_text(&vars),
            });
            let mut ok = check.min >= 0;
            if !no_bijection {
                let b = check_bijection(params)?;
                report["bijection"] = json!(b);
                ok &= b;
            }
            print(report);
            Ok(ok)
        }
        Command::Pipeline {
            config,
            params,
            ell,
            mask,
            objective,
            until,
            out,
        } => {
            let mut c = match &config {
                Some(path) => PipelineConfig::load(path)?,
                None => PipelineConfig::default(),
            };
            c.params = params.unwrap_or(c.params);
            c.ell = ell.unwrap_or(c.ell);
            c.mask = mask.or(c.mask);
            c.objective = objective.unwrap_or(c.objective);
            c.until = until.unwrap_or(c.until);
            c.output_dir = out.unwrap_or(c.output_dir);
            let outcome = run_pipeline(&c)?;
            println!("{}", outcome.report.to_json());
            Ok(outcome.report.succeeded(c.until))
        }
        Command::Config { defaults, check } => {
            if let Some(path) = check {
                PipelineConfig::load(&path)?;
                println!("ok");
            } else if defaults {
                print!("{}", PipelineConfig::default().to_text());
            } else {
                bail!("pass --defaults or --check FILE");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
