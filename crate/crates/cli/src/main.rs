//! Command-line front end: batch computations, axiom suites and exports.
//!
//! Every run echoes its fully resolved configuration, so outputs are
//! reproducible byte-for-byte given the same arguments and seed. Check
//! suites may run their independent checks on worker threads (capped by
//! HOVELKIT_THREADS); reports are always emitted in canonical order.
//! Exit codes: 0 on success/pass, 1 when a suite reports failures, 2 on
//! usage errors.

use clap::{Args, Parser, Subcommand};
use hovelkit::apartment::{
    enclosure, ApartmentModel, EnclosureBody, EnclosureSpec, PreorderVerdict, Shape,
};
use hovelkit::bordered::{project, BorderedApartment, BorderedFlavor};
use hovelkit::hovel::{
    build_tree, certify_membership_oracle, check_mao, check_p1, check_p10, check_p2, check_p3,
    check_p4, check_p5, check_p6, check_p7, check_p8, check_p9, iwasawa_and_bbi_checks,
    residue_roots, sample_points, FacadeSpec, ParahoricFamily,
};
use hovelkit::instances::{loop_sl2_instance, sl2_instance, sl3_instance, RootDatumInstance};
use hovelkit::kac::{
    imaginary_roots, named_matrix, real_roots, weyl_elements, KacMoodyMatrix,
    RootGeneratingSystem, DEFAULT_ENUM_LIMIT,
};
use hovelkit::rat::{rat_from_str, rat_to_string, Rat, ValueGroup};
use hovelkit::sampler::Sampler;
use hovelkit::valuation::{
    check_grd, check_rd1, check_rd2, check_rd4, check_rd5, check_v0, check_v1, check_v2_1,
    check_v2_2, check_v3, check_v4, Budget, ValuationReport,
};
use hovelkit::vectorial::{
    facet_membership, locate_in_tits_cone, Realization, RealizationKind, Sign, TitsVerdict,
    VectorialFacet,
};
use std::io::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hovelkit",
    about = "Kac-Moody root systems, affine apartments and desk-scale hovels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Args)]
struct MatrixArg {
    /// Named matrix (a1, a2, b2, g2, aff_a1, hyp_33) or inline JSON rows
    /// like [[2,-1],[-1,2]].
    #[arg(long)]
    matrix: String,
}

impl MatrixArg {
    fn resolve(&self) -> Result<KacMoodyMatrix, String> {
        if let Some(m) = named_matrix(&self.matrix) {
            return Ok(m);
        }
        let rows: Vec<Vec<i64>> = serde_json::from_str(&self.matrix)
            .map_err(|e| format!("matrix is neither a known alias nor JSON rows: {e}"))?;
        KacMoodyMatrix::new(rows).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a Kac-Moody matrix per indecomposable block.
    Classify(MatrixArg),
    /// Enumerate roots up to a height cap.
    Roots {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 5)]
        cap: i64,
        /// real | imaginary | all
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Enumerate Weyl group elements up to a length cap.
    Weyl {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 4)]
        cap: usize,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Locate a point in the Tits cone and report its facet.
    Facet {
        #[command(flatten)]
        matrix: MatrixArg,
        /// Comma-separated rational coordinates, e.g. 1/2,-3.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 10_000)]
        step_cap: usize,
    },
    /// Compute an enclosure certificate for a shape.
    Enclose {
        /// Model spec: <alias>,<Z|R>, e.g. a1,Z.
        #[arg(long)]
        model: String,
        /// cl_sharp | cl_phi | cl_phi_r | cl_delta | cl_delta_ma |
        /// cl_delta_r | conv
        #[arg(long)]
        spec: String,
        /// point:<coords> or segment:<coords>:<coords>
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 4)]
        cap: i64,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Decide the Tits preorder between two points.
    Preorder {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Describe a facade of the bordered apartment.
    Facade {
        #[command(flatten)]
        matrix: MatrixArg,
        /// Direction facet type J, comma-separated indices (empty = the
        /// chamber direction).
        #[arg(long, default_value = "")]
        j_set: String,
        #[arg(long, default_value_t = 4)]
        cap: i64,
    },
    /// Project a facade point to a facade in its star.
    Project {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value = "")]
        j_from: String,
        #[arg(long)]
        j_to: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 4)]
        cap: i64,
    },
    /// Run the valuation axiom suite (V0)-(V4).
    CheckValuation {
        /// sl2 | sl3 | loop_sl2
        #[arg(long, default_value = "sl2")]
        instance: String,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the root-datum axiom suite (RD1)-(RD5)/(GRD).
    CheckRd {
        #[arg(long, default_value = "sl2")]
        instance: String,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the parahoric axiom suite on the minimal family.
    CheckParahoric {
        /// sl2 | sl3
        #[arg(long, default_value = "sl2")]
        instance: String,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the ordered-hovel segment checks (MAO).
    CheckMao {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the Bruhat-Tits tree of SL2(Q, v_p).
    Tree {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Write DOT output to this path.
        #[arg(long)]
        dot: Option<String>,
    },
    /// Residue root system at a point.
    Residue {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 5)]
        cap: i64,
    },
}

fn parse_point(s: &str) -> Result<Vec<Rat>, String> {
    s.split(',')
        .map(|c| rat_from_str(c.trim()))
        .collect::<Result<Vec<_>, _>>()
}

fn parse_jset(s: &str) -> Result<Vec<usize>, String> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|c| c.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

fn q_model(matrix: &KacMoodyMatrix, vg: ValueGroup, cap: i64) -> Result<ApartmentModel, String> {
    let rgs = RootGeneratingSystem::minimal_adjoint(matrix.clone());
    let real = Realization::build(&rgs, RealizationKind::Q).map_err(|e| e.to_string())?;
    ApartmentModel::new(real, vg, cap).map_err(|e| e.to_string())
}

fn echo_config(cmd: &str, detail: &serde_json::Value) {
    eprintln!("# hovelkit {cmd} config: {detail}");
}

fn thread_cap() -> usize {
    std::env::var("HOVELKIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Runs independent report jobs on up to `thread_cap()` workers and
/// returns the results in submission order, independent of scheduling.
fn run_jobs(jobs: Vec<Box<dyn FnOnce() -> ValuationReport + Send>>) -> Vec<ValuationReport> {
    let cap = thread_cap().max(1);
    let mut results: Vec<Option<ValuationReport>> = Vec::new();
    results.resize_with(jobs.len(), || None);
    let mut queue: Vec<(usize, Box<dyn FnOnce() -> ValuationReport + Send>)> =
        jobs.into_iter().enumerate().collect();
    while !queue.is_empty() {
        let batch: Vec<_> = queue
            .drain(..queue.len().min(cap))
            .collect();
        let outputs = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .into_iter()
                .map(|(idx, job)| scope.spawn(move || (idx, job())))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("job panicked"))
                .collect::<Vec<_>>()
        });
        for (idx, rep) in outputs {
            results[idx] = Some(rep);
        }
    }
    results.into_iter().map(|r| r.expect("job ran")).collect()
}

fn emit_reports(reports: &[ValuationReport]) -> bool {
    let mut ok = true;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for rep in reports {
        writeln!(out, "{}", rep.to_json_line()).expect("stdout");
        ok &= rep.passed();
    }
    ok
}

fn valuation_jobs<I>(inst: std::sync::Arc<I>, budget: Budget) -> Vec<Box<dyn FnOnce() -> ValuationReport + Send>>
where
    I: RootDatumInstance + Send + Sync + 'static,
{
    let mk = |f: fn(&I, &Budget) -> ValuationReport| {
        let inst = inst.clone();
        Box::new(move || f(&inst, &budget)) as Box<dyn FnOnce() -> ValuationReport + Send>
    };
    vec![
        mk(check_v0),
        mk(check_v1),
        mk(check_v2_1),
        mk(check_v2_2),
        mk(check_v3),
        mk(check_v4),
    ]
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify(m) => {
            let matrix = m.resolve()?;
            echo_config("classify", &serde_json::json!({"matrix": m.matrix}));
            for block in matrix.classify() {
                println!(
                    "block {:?}: {}",
                    block.support,
                    match block.kind {
                        hovelkit::kac::BlockType::Finite => "finite",
                        hovelkit::kac::BlockType::Affine => "affine",
                        hovelkit::kac::BlockType::Indefinite => "indefinite",
                    }
                );
            }
            Ok(true)
        }
        Command::Roots {
            matrix,
            cap,
            kind,
            format,
        } => {
            let m = matrix.resolve()?;
            echo_config(
                "roots",
                &serde_json::json!({"matrix": matrix.matrix, "cap": cap, "kind": kind}),
            );
            let slice = match kind.as_str() {
                "real" => real_roots(&m, cap, DEFAULT_ENUM_LIMIT),
                "imaginary" => imaginary_roots(&m, cap, DEFAULT_ENUM_LIMIT),
                "all" => hovelkit::kac::full_slice(&m, cap, DEFAULT_ENUM_LIMIT),
                other => return Err(format!("unknown root kind {other:?}")),
            }
            .map_err(|e| e.to_string())?;
            if format == "json" {
                let roots: Vec<&hovelkit::kac::Root> =
                    slice.roots().iter().map(|r| &r.root).collect();
                println!("{}", serde_json::to_string_pretty(&roots).expect("json"));
            } else {
                for r in slice.roots() {
                    println!(
                        "{:?} {} height {}",
                        r.root.coords(),
                        match r.root.tag() {
                            hovelkit::kac::RootTag::Real => "real",
                            hovelkit::kac::RootTag::Imaginary => "imaginary",
                        },
                        r.root.height()
                    );
                }
                println!("total: {} roots at cap {}", slice.len(), cap);
            }
            Ok(true)
        }
        Command::Weyl {
            matrix,
            cap,
            format,
        } => {
            let m = matrix.resolve()?;
            echo_config(
                "weyl",
                &serde_json::json!({"matrix": matrix.matrix, "cap": cap}),
            );
            let elements = weyl_elements(&m, cap, DEFAULT_ENUM_LIMIT).map_err(|e| e.to_string())?;
            if format == "json" {
                let words: Vec<&[usize]> = elements.iter().map(|w| w.word()).collect();
                println!("{}", serde_json::to_string(&words).expect("json"));
            } else {
                for w in &elements {
                    println!("{:?}", w.word());
                }
                println!("total: {} elements of length <= {}", elements.len(), cap);
            }
            Ok(true)
        }
        Command::Facet {
            matrix,
            point,
            step_cap,
        } => {
            let m = matrix.resolve()?;
            let v = parse_point(&point)?;
            echo_config(
                "facet",
                &serde_json::json!({"matrix": matrix.matrix, "point": point}),
            );
            let rgs = RootGeneratingSystem::minimal_adjoint(m);
            let real = Realization::build(&rgs, RealizationKind::Q).map_err(|e| e.to_string())?;
            match locate_in_tits_cone(&real, &v, step_cap) {
                TitsVerdict::InPositive(f) => {
                    debug_assert!(facet_membership(&real, &f, &v).unwrap_or(false));
                    println!(
                        "in positive cone: {}",
                        serde_json::to_string(&f.to_json()).expect("json")
                    );
                }
                TitsVerdict::InNegative(f) => println!(
                    "in negative cone: {}",
                    serde_json::to_string(&f.to_json()).expect("json")
                ),
                TitsVerdict::Outside => println!("outside both cones"),
                TitsVerdict::Unknown { steps_used } => {
                    println!("unknown after {steps_used} descent steps")
                }
            }
            Ok(true)
        }
        Command::Enclose {
            model,
            spec,
            shape,
            cap,
            format,
        } => {
            let (alias, vg) = model
                .split_once(',')
                .ok_or_else(|| "model must look like a1,Z".to_string())?;
            let vg = match vg {
                "Z" => ValueGroup::integers(),
                "R" => ValueGroup::FullLine,
                other => return Err(format!("unknown value group {other:?}")),
            };
            let m = named_matrix(alias).ok_or_else(|| format!("unknown alias {alias:?}"))?;
            let am = q_model(&m, vg, cap)?;
            let espec =
                EnclosureSpec::parse(&spec).ok_or_else(|| format!("unknown spec {spec:?}"))?;
            let parsed_shape = parse_shape(&shape, am.dim())?;
            echo_config(
                "enclose",
                &serde_json::json!({"model": model, "spec": spec, "shape": shape, "cap": cap}),
            );
            let enc = enclosure(&am, espec, &parsed_shape).map_err(|e| e.to_string())?;
            match (&enc.body, format.as_str()) {
                (EnclosureBody::Certificate(c), "json") => {
                    println!("{}", serde_json::to_string(&c.to_json()).expect("json"));
                }
                (EnclosureBody::Certificate(c), _) => {
                    for h in &c.closed {
                        println!("D({:?}, {})", h.root, rat_to_string(&h.level));
                    }
                    println!("{} half-spaces at cap {}", c.closed.len(), enc.cap);
                }
                (EnclosureBody::Hull(pts), _) => {
                    for p in pts {
                        println!(
                            "vertex ({})",
                            p.iter().map(rat_to_string).collect::<Vec<_>>().join(", ")
                        );
                    }
                    println!("closed convex hull of {} points", pts.len());
                }
            }
            Ok(true)
        }
        Command::Preorder { matrix, x, y } => {
            let m = matrix.resolve()?;
            let am = q_model(&m, ValueGroup::integers(), 4)?;
            let xp = parse_point(&x)?;
            let yp = parse_point(&y)?;
            echo_config(
                "preorder",
                &serde_json::json!({"matrix": matrix.matrix, "x": x, "y": y}),
            );
            match hovelkit::apartment::preorder_leq(&am, &xp, &yp, 100_000) {
                PreorderVerdict::Yes => println!("yes: x <= y"),
                PreorderVerdict::No => println!("no"),
                PreorderVerdict::Unknown => println!("unknown (indefinite type, budget out)"),
            }
            Ok(true)
        }
        Command::Facade { matrix, j_set, cap } => {
            let m = matrix.resolve()?;
            let j = parse_jset(&j_set)?;
            let am = q_model(&m, ValueGroup::integers(), cap)?;
            echo_config(
                "facade",
                &serde_json::json!({"matrix": matrix.matrix, "J": j}),
            );
            let b = BorderedApartment::new(am, BorderedFlavor::Essential);
            let dir = VectorialFacet::fundamental(&m, Sign::Plus, &j);
            let f = b.facade(&dir).map_err(|e| e.to_string())?;
            println!(
                "direction: {}",
                serde_json::to_string(&dir.to_json()).expect("json")
            );
            println!("spherical: {}", f.is_spherical(b.model()));
            println!("facade root count (within cap): {}", f.real_roots().len());
            for r in f.real_roots() {
                println!("  root {r:?}");
            }
            Ok(true)
        }
        Command::Project {
            matrix,
            j_from,
            j_to,
            point,
            cap,
        } => {
            let m = matrix.resolve()?;
            let from = parse_jset(&j_from)?;
            let to = parse_jset(&j_to)?;
            let v = parse_point(&point)?;
            let am = q_model(&m, ValueGroup::integers(), cap)?;
            echo_config(
                "project",
                &serde_json::json!({"matrix": matrix.matrix, "from": from, "to": to}),
            );
            let b = BorderedApartment::new(am, BorderedFlavor::Essential);
            let src = VectorialFacet::fundamental(&m, Sign::Plus, &from);
            let dst = VectorialFacet::fundamental(&m, Sign::Plus, &to);
            let p = b.point(&src, &v).map_err(|e| e.to_string())?;
            let moved = project(&b, &p, &dst).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string(&moved.to_json()).expect("json"));
            Ok(true)
        }
        Command::CheckValuation {
            instance,
            p,
            samples,
            seed,
        } => {
            echo_config(
                "check-valuation",
                &serde_json::json!({"instance": instance, "p": p, "samples": samples, "seed": seed,
                                    "threads": thread_cap()}),
            );
            let budget = Budget {
                samples_per_root: samples,
                seed,
            };
            let reports = match instance.as_str() {
                "sl2" => {
                    let inst = std::sync::Arc::new(sl2_instance(p).map_err(|e| e.to_string())?);
                    run_jobs(valuation_jobs(inst, budget))
                }
                "sl3" => {
                    let inst = std::sync::Arc::new(sl3_instance(p).map_err(|e| e.to_string())?);
                    run_jobs(valuation_jobs(inst, budget))
                }
                "loop_sl2" => {
                    let inst =
                        std::sync::Arc::new(loop_sl2_instance(p, 7).map_err(|e| e.to_string())?);
                    run_jobs(valuation_jobs(inst, budget))
                }
                other => return Err(format!("unknown instance {other:?}")),
            };
            Ok(emit_reports(&reports))
        }
        Command::CheckRd {
            instance,
            p,
            samples,
            seed,
        } => {
            echo_config(
                "check-rd",
                &serde_json::json!({"instance": instance, "p": p, "samples": samples, "seed": seed}),
            );
            let budget = Budget {
                samples_per_root: samples,
                seed,
            };
            let reports = match instance.as_str() {
                "sl2" | "sl3" => {
                    let inst = if instance == "sl2" {
                        sl2_instance(p).map_err(|e| e.to_string())?
                    } else {
                        sl3_instance(p).map_err(|e| e.to_string())?
                    };
                    let rd5 = check_rd5(
                        &inst,
                        &budget,
                        |g| g.is_lower_unipotent(),
                        |s| {
                            let mut g = inst.sample_z(s, 1).pop().expect("one");
                            for entry in inst.slice().roots() {
                                if entry.root.is_positive() && s.bool() {
                                    let r = s.padic_scalar(inst.prime(), 2);
                                    g = g
                                        .mul(&inst.x_alpha(entry.root.coords(), &r).expect("root"));
                                }
                            }
                            g
                        },
                    );
                    vec![
                        check_rd1(&inst, &budget),
                        check_rd2(&inst, &budget),
                        check_rd4(&inst, &budget),
                        rd5,
                        check_grd(&inst, &budget),
                    ]
                }
                "loop_sl2" => {
                    let inst = loop_sl2_instance(p, 7).map_err(|e| e.to_string())?;
                    vec![
                        check_rd1(&inst, &budget),
                        check_rd2(&inst, &budget),
                        check_rd4(&inst, &budget),
                        check_grd(&inst, &budget),
                    ]
                }
                other => return Err(format!("unknown instance {other:?}")),
            };
            Ok(emit_reports(&reports))
        }
        Command::CheckParahoric {
            instance,
            p,
            points,
            seed,
        } => {
            echo_config(
                "check-parahoric",
                &serde_json::json!({"instance": instance, "p": p, "points": points, "seed": seed}),
            );
            let inst = match instance.as_str() {
                "sl2" => sl2_instance(p).map_err(|e| e.to_string())?,
                "sl3" => sl3_instance(p).map_err(|e| e.to_string())?,
                other => {
                    return Err(format!(
                        "parahoric checks need a classical instance, got {other:?}"
                    ))
                }
            };
            let family = ParahoricFamily::new(&inst);
            let budget = Budget {
                samples_per_root: 60,
                seed,
            };
            let mut s = Sampler::new(seed);
            let pts = sample_points(family.model(), &mut s, points);
            // The facade-dependent axioms run on the fundamental
            // spherical chamber direction.
            let facade = FacadeSpec {
                j_set: vec![],
                sign: Sign::Plus,
            };
            let reports = vec![
                certify_membership_oracle(&family, &pts[0], 4, &budget),
                check_p1(&family, &pts, &budget),
                check_p2(&family, &pts, &budget),
                check_p3(&family, &pts, &budget),
                check_p4(&family, &pts, &budget),
                check_p5(&family, &pts, &budget),
                check_p6(&family, &facade, &pts, &budget),
                check_p7(&family, &facade, &pts, &budget),
                check_p8(&family, &pts, &budget),
                check_p9(&family, &facade, &pts, &budget),
                check_p10(&family, &budget),
                iwasawa_and_bbi_checks(&family, &budget),
            ];
            Ok(emit_reports(&reports))
        }
        Command::CheckMao { p, trials, seed } => {
            echo_config(
                "check-mao",
                &serde_json::json!({"p": p, "trials": trials, "seed": seed}),
            );
            let inst = sl2_instance(p).map_err(|e| e.to_string())?;
            let family = ParahoricFamily::new(&inst);
            let budget = Budget {
                samples_per_root: 60,
                seed,
            };
            let rep = check_mao(&family, trials, &budget);
            Ok(emit_reports(&[rep]))
        }
        Command::Tree { p, depth, dot } => {
            echo_config("tree", &serde_json::json!({"p": p, "depth": depth}));
            let inst = sl2_instance(p).map_err(|e| e.to_string())?;
            let family = ParahoricFamily::new(&inst);
            let tree = build_tree(&family, depth).map_err(|e| e.to_string())?;
            println!("sphere sizes: {:?}", tree.sphere_sizes());
            if let Some(path) = dot {
                std::fs::write(&path, tree.to_dot()).map_err(|e| e.to_string())?;
                println!("wrote {path}");
            }
            Ok(true)
        }
        Command::Residue { matrix, point, cap } => {
            let m = matrix.resolve()?;
            let v = parse_point(&point)?;
            let am = q_model(&m, ValueGroup::integers(), cap)?;
            echo_config(
                "residue",
                &serde_json::json!({"matrix": matrix.matrix, "point": point, "cap": cap}),
            );
            let r = residue_roots(&am, &v);
            println!("special: {}", r.special);
            for root in &r.roots {
                println!("  root {root:?}");
            }
            println!("{} residue roots at cap {}", r.roots.len(), cap);
            Ok(true)
        }
    }
}

fn parse_shape(s: &str, dim: usize) -> Result<Shape, String> {
    let mut parts = s.split(':');
    let kind = parts.next().ok_or("empty shape")?;
    match kind {
        "point" => {
            let coords = parse_point(parts.next().ok_or("point needs coordinates")?)?;
            if coords.len() != dim {
                return Err(format!("expected {dim} coordinates"));
            }
            Ok(Shape::Point(coords))
        }
        "segment" => {
            let a = parse_point(parts.next().ok_or("segment needs two endpoints")?)?;
            let b = parse_point(parts.next().ok_or("segment needs two endpoints")?)?;
            Ok(Shape::Segment(a, b))
        }
        other => Err(format!("unknown shape kind {other:?}")),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
