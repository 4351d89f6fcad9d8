//! Command-line front end: parse groups and polynomials, build quotient
//! complexes, search shellings and cell bases, run Goebel decompositions,
//! compute homology, and survey Cohen-Macaulayness across subgroup classes.
//!
//! Exit codes: 0 success (survey: everything agrees), 1 survey mismatch,
//! 2 parse/usage error, 3 search budget exceeded.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};

use permcm::bases::{
    cm_report, find_shelling, goebel_decompose, greedy_cell_basis, represent_on_basis,
    shelling_basis, verify_cell_basis, BasesError, ShellingSearch, DEFAULT_SHELLING_BUDGET,
};
use permcm::permgrp::{parse_group_with_cap, PermutationGroup, DEFAULT_GROUP_CAP};
use permcm::polyring::{parse_polynomial, Domain, Polynomial};
use permcm::qcomplex::{cross_check_constructions, SigmaPoset};
use permcm::survey::{survey_classes, SurveyConfig};
use permcm::QuotientComplex;

#[derive(Parser)]
#[command(
    name = "permcm",
    about = "Invariant rings of permutation groups: quotient complexes, bases, and Cohen-Macaulayness",
    version,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisKind {
    Shelling,
    Cell,
}

#[derive(Args)]
struct GroupArgs {
    /// Number of points the group permutes.
    #[arg(long)]
    degree: usize,
    /// Generators in cycle notation, e.g. "(1,2,3,4)(1,3)"; empty for the
    /// trivial group.
    #[arg(long, default_value = "")]
    group: String,
    /// Cap on the group order during closure.
    #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
    cap: usize,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Reflection-rotation subgroup and its index.
    Grr {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the quotient complex of the subdivided simplex boundary.
    Complex {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also build the double-coset poset and cross-check the two
        /// constructions.
        #[arg(long)]
        validate: bool,
    },
    /// Search for a shelling and report the induced module basis.
    Shelling {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Node budget for the backtracking search.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Greedy cell-basis search over a field.
    Cellbasis {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Coefficient domain: q or fp:<p>.
        #[arg(long, default_value = "q")]
        coeff: String,
    },
    /// Decompose an invariant onto special orbit monomials.
    Goebel {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Polynomial expression, e.g. "x1^2*x2 + x2^2*x3".
        #[arg(long)]
        poly: String,
        /// Coefficient domain: z, q, or fp:<p>.
        #[arg(long, default_value = "z")]
        coeff: String,
        /// Replace the polynomial by the sum of its orbit under the group.
        #[arg(long)]
        orbit: bool,
    },
    /// Represent an invariant on a shelling or cell basis.
    Represent {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "z")]
        coeff: String,
        #[arg(long, value_enum, default_value_t = BasisKind::Shelling)]
        basis: BasisKind,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        orbit: bool,
    },
    /// Reduced homology of the order complex of the quotient's face poset.
    Homology {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cohen-Macaulayness report for one group.
    Cm {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also run the topological link-homology test.
        #[arg(long)]
        topology: bool,
    },
    /// Run the Cohen-Macaulayness report over every subgroup conjugacy
    /// class of S_n; exits 1 if any verdict disagrees with the prediction.
    Survey {
        /// Degree n of the ambient symmetric group.
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
        cap: usize,
        /// Worker threads evaluating subgroup classes.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        topology: bool,
    },
}

fn parse_domain(spec: &str) -> Result<Domain, String> {
    match spec {
        "z" => Ok(Domain::Int),
        "q" => Ok(Domain::Rat),
        other => {
            if let Some(p) = other.strip_prefix("fp:") {
                let p: u64 = p.parse().map_err(|_| format!("bad prime '{p}'"))?;
                Domain::fp(p).map_err(|e| e.to_string())
            } else {
                Err(format!(
                    "unknown coefficient domain '{other}' (use z, q, or fp:<p>)"
                ))
            }
        }
    }
}

fn load_group(args: &GroupArgs) -> Result<PermutationGroup, String> {
    parse_group_with_cap(&args.group, args.degree, args.cap).map_err(|e| e.to_string())
}

fn load_poly(
    expr: &str,
    degree: usize,
    domain: Domain,
    orbit: bool,
    group: &PermutationGroup,
) -> Result<Polynomial, String> {
    let f = parse_polynomial(expr, degree, domain).map_err(|e| e.to_string())?;
    if orbit {
        Ok(permcm::bases::symmetrize(group, &f))
    } else {
        Ok(f)
    }
}

fn shelling_budget(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("PERMCM_BUDGET")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_SHELLING_BUDGET)
}

fn emit(format: Format, json: serde_json::Value, text: String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
        Format::Text => println!("{text}"),
    }
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Grr { group, output } => {
            let g = load_group(&group)?;
            let (grr, index) = g.rr_subgroup();
            let json = serde_json::json!({
                "group": g.to_string(),
                "order": g.order(),
                "grr": grr.to_string(),
                "grr_order": grr.order(),
                "index": index,
                "huffman": g.huffman_classify(),
            });
            let text = format!(
                "G = {} (order {})\nG_rr = {} (order {}, index {})\nclassification: {:?}",
                g,
                g.order(),
                grr,
                grr.order(),
                index,
                g.huffman_classify()
            );
            emit(output.format, json, text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Complex {
            group,
            output,
            validate,
        } => {
            let g = load_group(&group)?;
            let complex = QuotientComplex::build(&g).map_err(|e| e.to_string())?;
            let validated = if validate {
                let sigma = SigmaPoset::build(&g);
                if !cross_check_constructions(&complex, &sigma) {
                    return Err("double-coset construction disagrees with chain orbits".into());
                }
                Some(true)
            } else {
                None
            };
            let mut json = complex.to_json();
            if let Some(v) = validated {
                json["validated"] = serde_json::json!(v);
            }
            let mut text = format!(
                "quotient complex of {} (degree {}): {} faces, {} facets\n",
                g,
                g.degree(),
                complex.num_faces(),
                complex.facets().len()
            );
            for (id, face) in complex.faces().iter().enumerate() {
                text.push_str(&format!(
                    "  [{id}] {}  ranks {:?}  orbit size {}\n",
                    face.label(),
                    face.rank_list(),
                    face.orbit_size
                ));
            }
            if let Some(true) = validated {
                text.push_str("double-coset cross-check: ok\n");
            }
            emit(output.format, json, text.trim_end().to_string());
            Ok(ExitCode::SUCCESS)
        }
        Command::Shelling {
            group,
            output,
            budget,
        } => {
            let g = load_group(&group)?;
            let complex = QuotientComplex::build(&g).map_err(|e| e.to_string())?;
            match find_shelling(&complex, shelling_budget(budget)) {
                Ok(shelling) => {
                    let basis = shelling_basis(&complex, &shelling);
                    let order_labels: Vec<String> = shelling
                        .facet_order
                        .iter()
                        .map(|&f| complex.face(f).label())
                        .collect();
                    let basis_entries: Vec<(String, String)> = basis
                        .iter()
                        .map(|&f| {
                            (
                                complex.face(f).label(),
                                complex.face_to_orbit_monomial(f, Domain::Int).to_string(),
                            )
                        })
                        .collect();
                    let json = serde_json::json!({
                        "group": g.to_string(),
                        "shelling": order_labels,
                        "basis": basis_entries
                            .iter()
                            .map(|(l, m)| serde_json::json!({"face": l, "orbit_monomial": m}))
                            .collect::<Vec<_>>(),
                    });
                    let mut text = format!("shelling: {}\nbasis:\n", order_labels.join(", "));
                    for (label, monomial) in &basis_entries {
                        text.push_str(&format!("  {label}: {monomial}\n"));
                    }
                    emit(output.format, json, text.trim_end().to_string());
                    Ok(ExitCode::SUCCESS)
                }
                Err(ShellingSearch::NotFound) => {
                    emit(
                        output.format,
                        serde_json::json!({"group": g.to_string(), "shelling": null}),
                        "no shelling exists".to_string(),
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(ShellingSearch::BudgetExceeded(b)) => {
                    eprintln!("error: shelling search budget of {b} nodes exceeded");
                    Ok(ExitCode::from(3))
                }
            }
        }
        Command::Cellbasis {
            group,
            output,
            coeff,
        } => {
            let g = load_group(&group)?;
            let domain = parse_domain(&coeff)?;
            if matches!(domain, Domain::Int) {
                return Err("cell-basis selection needs a field: use q or fp:<p>".into());
            }
            let complex = QuotientComplex::build(&g).map_err(|e| e.to_string())?;
            match greedy_cell_basis(&complex, domain) {
                Ok(basis) => {
                    let entries: Vec<(String, Vec<u8>)> = basis
                        .faces
                        .iter()
                        .map(|&f| (complex.face(f).label(), complex.facet_vector_canonical(f)))
                        .collect();
                    let json = serde_json::json!({
                        "group": g.to_string(),
                        "determinant": basis.determinant.to_string(),
                        "basis": entries
                            .iter()
                            .map(|(l, v)| serde_json::json!({"face": l, "facet_vector": v}))
                            .collect::<Vec<_>>(),
                    });
                    let mut text =
                        format!("cell basis (determinant {}):\n", basis.determinant);
                    for (label, vector) in &entries {
                        text.push_str(&format!("  {label}  facet vector {vector:?}\n"));
                    }
                    emit(output.format, json, text.trim_end().to_string());
                    Ok(ExitCode::SUCCESS)
                }
                Err(failure) => {
                    let selected: Vec<String> = failure
                        .selected
                        .iter()
                        .map(|&f| complex.face(f).label())
                        .collect();
                    emit(
                        output.format,
                        serde_json::json!({
                            "group": g.to_string(),
                            "failure": {
                                "selected": selected,
                                "span_rank": failure.span_rank,
                            },
                        }),
                        format!(
                            "greedy search failed: rank {} of {} reached with faces {:?}",
                            failure.span_rank,
                            complex.facets().len(),
                            selected
                        ),
                    );
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Goebel {
            group,
            output,
            poly,
            coeff,
            orbit,
        } => {
            let g = load_group(&group)?;
            let domain = parse_domain(&coeff)?;
            let f = load_poly(&poly, group.degree, domain, orbit, &g)?;
            let decomposition = goebel_decompose(&g, &f).map_err(|e| e.to_string())?;
            let json = decomposition.to_json();
            let mut text = format!("{f}\n= sum of\n");
            for (chain, coefficient) in &decomposition.entries {
                let factors: Vec<(u32, u16)> = chain.iter().map(|&m| (m, 1)).collect();
                let special = permcm::srring::garsia(
                    &permcm::srring::ChainMonomial::new(group.degree, &factors).unwrap(),
                );
                let orbit_poly = permcm::polyring::orbit_monomial(&g, &special, domain).unwrap();
                text.push_str(&format!(
                    "  ({}) * ({})\n",
                    coefficient.to_string_with("s"),
                    orbit_poly
                ));
            }
            emit(output.format, json, text.trim_end().to_string());
            Ok(ExitCode::SUCCESS)
        }
        Command::Represent {
            group,
            output,
            poly,
            coeff,
            basis,
            budget,
            orbit,
        } => {
            let g = load_group(&group)?;
            let domain = parse_domain(&coeff)?;
            let f = load_poly(&poly, group.degree, domain, orbit, &g)?;
            let complex = QuotientComplex::build(&g).map_err(|e| e.to_string())?;
            let basis_faces = match basis {
                BasisKind::Shelling => match find_shelling(&complex, shelling_budget(budget)) {
                    Ok(shelling) => shelling_basis(&complex, &shelling),
                    Err(ShellingSearch::NotFound) => {
                        return Err("no shelling exists for this complex".into())
                    }
                    Err(ShellingSearch::BudgetExceeded(b)) => {
                        eprintln!("error: shelling search budget of {b} nodes exceeded");
                        return Ok(ExitCode::from(3));
                    }
                },
                BasisKind::Cell => {
                    let field = if matches!(domain, Domain::Int) {
                        Domain::Rat
                    } else {
                        domain
                    };
                    greedy_cell_basis(&complex, field)
                        .map_err(|_| "greedy cell-basis search failed".to_string())?
                        .faces
                }
            };
            let verification =
                verify_cell_basis(&complex, &basis_faces, domain).map_err(|e| e.to_string())?;
            if !verification.is_basis {
                return Err("selected faces are not a basis over this domain".into());
            }
            let rep = match represent_on_basis(&complex, &f, &basis_faces) {
                Ok(rep) => rep,
                Err(BasesError::NotInvariant) => {
                    return Err("polynomial is not invariant under the group".into())
                }
                Err(e) => return Err(e.to_string()),
            };
            let entries: Vec<(String, String)> = rep
                .iter()
                .map(|(face, c)| (complex.face(*face).label(), c.to_string_with("s")))
                .collect();
            let json = serde_json::json!({
                "group": g.to_string(),
                "polynomial": f.to_string(),
                "coefficients": entries
                    .iter()
                    .map(|(l, c)| serde_json::json!({"face": l, "coeff": c}))
                    .collect::<Vec<_>>(),
            });
            let mut text = format!("{f}\n= sum over the basis of\n");
            for (label, c) in &entries {
                text.push_str(&format!("  {label}: {c}\n"));
            }
            emit(output.format, json, text.trim_end().to_string());
            Ok(ExitCode::SUCCESS)
        }
        Command::Homology { group, output } => {
            let g = load_group(&group)?;
            let complex = QuotientComplex::build(&g).map_err(|e| e.to_string())?;
            let oc = complex.order_complex();
            let homology = oc.homology(true);
            let json = serde_json::json!({
                "group": g.to_string(),
                "dimension": oc.dimension(),
                "reduced_homology": (-1..=oc.dimension())
                    .map(|k| serde_json::json!({
                        "dim": k,
                        "group": homology.group(k).unwrap().to_string(),
                    }))
                    .collect::<Vec<_>>(),
            });
            let mut text = format!(
                "order complex of the face poset: dimension {}\n",
                oc.dimension()
            );
            for k in -1..=oc.dimension() {
                text.push_str(&format!("  H~_{k} = {}\n", homology.group(k).unwrap()));
            }
            emit(output.format, json, text.trim_end().to_string());
            Ok(ExitCode::SUCCESS)
        }
        Command::Cm {
            group,
            output,
            topology,
        } => {
            let g = load_group(&group)?;
            let report = cm_report(&g, topology);
            let json = serde_json::to_value(&report).unwrap();
            let mut text = format!(
                "G = {} (order {}), [G : G_rr] = {}\nprediction: {}\n",
                report.group,
                report.order,
                report.grr_index,
                if report.prediction {
                    "Cohen-Macaulay"
                } else {
                    "not Cohen-Macaulay"
                }
            );
            for (p, verdict) in &report.algebraic {
                text.push_str(&format!(
                    "  p={p}: generators {} (expected {}) -> {}\n",
                    verdict.count,
                    verdict.expected,
                    if verdict.cm { "CM" } else { "not CM" }
                ));
            }
            if let Some(t) = &report.topological {
                text.push_str(&format!(
                    "  topology: {}\n",
                    if t.is_cm { "CM" } else { "not CM" }
                ));
            }
            text.push_str(&format!("agree: {}", report.agree));
            emit(output.format, json, text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Survey {
            degree,
            output,
            cap,
            jobs,
            topology,
        } => {
            let config = SurveyConfig {
                cap,
                include_topology: topology,
            };
            let classes = survey_classes(degree, &config).map_err(|e| e.to_string())?;
            let jobs = jobs.max(1);
            // Evaluate classes concurrently; results keyed by index so the
            // output stays in canonical order regardless of schedule.
            let results: Mutex<BTreeMap<usize, permcm::bases::CmReport>> =
                Mutex::new(BTreeMap::new());
            let next = std::sync::atomic::AtomicUsize::new(0);
            std::thread::scope(|scope| {
                for _ in 0..jobs.min(classes.len().max(1)) {
                    scope.spawn(|| loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                        if i >= classes.len() {
                            break;
                        }
                        let report = cm_report(&classes[i], config.include_topology);
                        results.lock().unwrap().insert(i, report);
                    });
                }
            });
            let reports: Vec<permcm::bases::CmReport> =
                results.into_inner().unwrap().into_values().collect();
            let all_agree = reports.iter().all(|r| r.agree);
            let json = serde_json::json!({
                "degree": degree,
                "num_classes": reports.len(),
                "all_agree": all_agree,
                "classes": reports,
            });
            let mut text = format!(
                "{} subgroup conjugacy classes of S_{degree}\n",
                reports.len()
            );
            for r in &reports {
                let alg: Vec<String> = r
                    .algebraic
                    .iter()
                    .map(|(p, v)| {
                        format!(
                            "p={p}: {}/{} {}",
                            v.count,
                            v.expected,
                            if v.cm { "CM" } else { "not CM" }
                        )
                    })
                    .collect();
                text.push_str(&format!(
                    "  {} order {:<4} index {:<2} predicted {}  {}  {}\n",
                    if r.agree { "ok " } else { "BAD" },
                    r.order,
                    r.grr_index,
                    if r.prediction { "CM    " } else { "not CM" },
                    alg.join(", "),
                    r.group,
                ));
            }
            text.push_str(if all_agree {
                "Everything matched."
            } else {
                "Mismatches found!"
            });
            emit(output.format, json, text);
            Ok(if all_agree {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
