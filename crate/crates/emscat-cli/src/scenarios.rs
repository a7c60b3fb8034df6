//! Scenario drivers: translate a validated config into library calls and
//! collect the results into a report.

use emscat::effective_medium::{
    coefficient_field, convergence_study, divergence_diagnostic, generate_particles,
    lemma3_limit_check, negative_refraction_check, refraction_coefficient,
    solve_effective_field, EffectiveSolver,
};
use emscat::multi_scatter::{
    assemble_las, assemble_las_radial, eval_field_multi, solve_las_direct,
    solve_las_iterative, solve_las_preconditioned, MultiSolution, SolverTag,
};
use emscat::quadrature::BallRule;
use emscat::single_scatter::{eval_field_single, solve_single};
use emscat::types::RadialProfileKind;
use emscat::Vec3;

use crate::config::{vec3, RunConfig, Scenario, SolverChoice};
use crate::report::{field_columns, field_row, Report, Table};

pub fn run(cfg: &RunConfig) -> Result<Report, String> {
    let echo = serde_json::to_value(cfg).map_err(|e| e.to_string())?;
    let name = match cfg.scenario {
        Scenario::Single => "single",
        Scenario::Multi => "multi",
        Scenario::Effective => "effective",
        Scenario::Converge => "converge",
        Scenario::Nrcheck => "nrcheck",
        Scenario::Lemma3 => "lemma3",
    };
    let mut report = Report::new(name, echo);
    let lib = |e: emscat::Error| e.to_string();
    match cfg.scenario {
        Scenario::Single => {
            let incident = cfg.incident.as_ref().unwrap().build().map_err(lib)?;
            let particle = cfg.particle.as_ref().unwrap().build().map_err(lib)?;
            let k = incident.k;
            let rule = BallRule::new(
                cfg.numerics.quad_radial,
                cfg.numerics.quad_theta,
                cfg.numerics.quad_phi,
            );
            let moments = solve_single(&particle, &incident, k, &rule).map_err(lib)?;
            report.complex_vec("v_m", moments.v_m);
            report.complex("nu_m", moments.nu_m);
            report.complex("coeff_a", moments.coeffs.pg);
            report.complex("coeff_b", moments.coeffs.qgrad);
            let mut rows = Vec::new();
            for &p in &cfg.probes {
                let x = vec3(p);
                let e = eval_field_single(x, &moments, &particle, &incident, k).map_err(lib)?;
                rows.push(field_row(x, e));
            }
            report.table("field", Table { columns: field_columns("E"), rows });
        }
        Scenario::Multi => {
            let incident = cfg.incident.as_ref().unwrap().build().map_err(lib)?;
            let k = incident.k;
            let particles: Vec<_> = cfg
                .particles
                .iter()
                .map(|p| p.build())
                .collect::<emscat::Result<_>>()
                .map_err(lib)?;
            // direct/preconditioned use the exact radial blocks; the plain
            // iteration keeps the literal quadrature assembly for contrast
            let system = match cfg.numerics.solver {
                SolverChoice::Iterative => {
                    let rule = BallRule::new(
                        cfg.numerics.quad_radial,
                        cfg.numerics.quad_theta,
                        cfg.numerics.quad_phi,
                    );
                    assemble_las(&particles, &incident, k, &rule).map_err(lib)?
                }
                _ => assemble_las_radial(&particles, &incident, k).map_err(lib)?,
            };
            report.warnings.extend(system.warnings.iter().cloned());
            let norm = system.contraction_norm();
            report.real("contraction_norm", norm);
            let sol: MultiSolution = match cfg.numerics.solver {
                SolverChoice::Direct => solve_las_direct(&system).map_err(lib)?,
                SolverChoice::Iterative => {
                    solve_las_iterative(&system, cfg.numerics.tol, cfg.numerics.max_iter)
                        .map_err(lib)?
                }
                SolverChoice::Preconditioned => {
                    solve_las_preconditioned(&system, cfg.numerics.tol, cfg.numerics.max_iter)
                        .map_err(lib)?
                }
            };
            report.text(
                "solver",
                match sol.solver {
                    SolverTag::Direct => "direct",
                    SolverTag::Iterative => "iterative",
                },
            );
            report.integer("iterations", sol.iterations);
            report.real("residual", sol.residual);
            let mut rows = Vec::new();
            for (m, p) in particles.iter().enumerate() {
                rows.push(vec![
                    m as f64,
                    p.center.x,
                    p.center.y,
                    p.center.z,
                    sol.v[m].x.re,
                    sol.v[m].x.im,
                    sol.v[m].y.re,
                    sol.v[m].y.im,
                    sol.v[m].z.re,
                    sol.v[m].z.im,
                    sol.nu[m].re,
                    sol.nu[m].im,
                ]);
            }
            report.table(
                "moments",
                Table {
                    columns: [
                        "index", "x", "y", "z", "v_x_re", "v_x_im", "v_y_re", "v_y_im",
                        "v_z_re", "v_z_im", "nu_re", "nu_im",
                    ]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                    rows,
                },
            );
            let mut rows = Vec::new();
            for &p in &cfg.probes {
                let x = vec3(p);
                let e = eval_field_multi(x, &sol, &particles, &incident, k).map_err(lib)?;
                rows.push(field_row(x, e));
            }
            report.table("field", Table { columns: field_columns("E"), rows });
        }
        Scenario::Effective => {
            let incident = cfg.incident.as_ref().unwrap().build().map_err(lib)?;
            let k = incident.k;
            let law_spec = cfg.law.as_ref().unwrap();
            let law = law_spec.build().map_err(lib)?;
            let c = coefficient_field(&law, law_spec.gamma.build(), RadialProfileKind::Constant);
            let solver = match cfg.numerics.solver {
                SolverChoice::Direct => EffectiveSolver::Direct,
                _ => EffectiveSolver::Iterative {
                    tol: cfg.numerics.tol,
                    max_iter: cfg.numerics.max_iter,
                },
            };
            let field = solve_effective_field(
                &|x| c(x),
                &incident,
                &law.domain,
                k,
                cfg.numerics.mesh,
                solver,
            )
            .map_err(lib)?;
            report.real("residual", field.residual);
            report.real("pde_residual", field.pde_residual());
            let model = refraction_coefficient(c.clone(), k).map_err(lib)?;
            report.complex("n2_at_center", model.n2(law.domain.center()));
            let diag = divergence_diagnostic(&field, &|x| c(x), k);
            report.real("divergence_rms", diag.eta_rms);
            report.real("divergence_max", diag.eta_max);
            report.real("divergence_identity_residual", diag.identity_residual_rms);
            let mut rows = Vec::new();
            for &p in &cfg.probes {
                let x = vec3(p);
                let e = field.eval_field(x).map_err(lib)?;
                rows.push(field_row(x, e));
            }
            report.table("field", Table { columns: field_columns("E_e"), rows });
        }
        Scenario::Converge => {
            let incident = cfg.incident.as_ref().unwrap().build().map_err(lib)?;
            let k = incident.k;
            let law_spec = cfg.law.as_ref().unwrap();
            let law = law_spec.build().map_err(lib)?;
            let gamma = law_spec.gamma.build();
            let c = coefficient_field(&law, gamma.clone(), RadialProfileKind::Constant);
            let study = cfg.study.as_ref().unwrap();
            let reference = solve_effective_field(
                &|x| c(x),
                &incident,
                &law.domain,
                k,
                cfg.numerics.mesh,
                EffectiveSolver::Iterative {
                    tol: cfg.numerics.tol,
                    max_iter: cfg.numerics.max_iter,
                },
            )
            .map_err(lib)?;
            let probes: Vec<Vec3> = study.probes.iter().map(|&p| vec3(p)).collect();
            let rows = convergence_study(
                &law,
                gamma,
                &incident,
                k,
                &study.a_values,
                &probes,
                cfg.numerics.seed,
                &reference,
            )
            .map_err(lib)?;
            report.table(
                "convergence",
                Table {
                    columns: ["a", "count", "total_volume", "max_probe_error"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    rows: rows
                        .iter()
                        .map(|r| {
                            vec![r.a, r.count as f64, r.total_volume, r.max_probe_error]
                        })
                        .collect(),
                },
            );
        }
        Scenario::Nrcheck => {
            let spec = cfg.nrcheck.as_ref().unwrap();
            let n = spec.form.build();
            let (negative, value) =
                negative_refraction_check(&*n, spec.omega).map_err(lib)?;
            report.boolean("negative", negative);
            report.real("value", value);
        }
        Scenario::Lemma3 => {
            let law = cfg.law.as_ref().unwrap().build().map_err(lib)?;
            let spec = cfg.lemma3.as_ref().unwrap();
            let f = spec.f.build();
            let rows = lemma3_limit_check(&*f, &law, &spec.a_values, cfg.numerics.seed)
                .map_err(lib)?;
            report.table(
                "lemma3",
                Table {
                    columns: ["a", "weighted_sum", "integral", "error"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    rows: rows
                        .iter()
                        .map(|r| vec![r.a, r.weighted_sum, r.integral, r.error])
                        .collect(),
                },
            );
        }
    }
    // smoke check shared by seeded scenarios: counts must be reproducible
    if matches!(cfg.scenario, Scenario::Converge | Scenario::Lemma3) {
        if let Some(law_spec) = &cfg.law {
            let law = law_spec.build().map_err(lib)?;
            let a = cfg
                .study
                .as_ref()
                .map(|s| s.a_values[0])
                .or_else(|| cfg.lemma3.as_ref().map(|l| l.a_values[0]))
                .unwrap();
            let gamma = law_spec.gamma.build();
            let n = generate_particles(&law, a, &|x| gamma(x), cfg.numerics.seed)
                .map_err(lib)?
                .len();
            report.integer("particle_count_at_first_a", n);
        }
    }
    Ok(report)
}
