//! Deterministic emitters for every subcommand, in text, CSV, JSON, and
//! LaTeX form. All iteration orders are canonical so equal inputs give
//! byte-identical bytes.

use num_traits::Zero;
use serde_json::json;

use qkdv_core::error::Error;
use qkdv_core::exact::rat::{rat_display, Rat};
use qkdv_core::fock::WeightBasis;
use qkdv_core::hamiltonians::HamiltonianRecord;
use qkdv_core::partitions::{enumerate_partitions, q_function, CharacterTable, Partition};
use qkdv_core::spectral::{DeformedSchur, SpectralCurve};
use qkdv_core::yjm::PropA1Report;

use crate::{partition_label, sigma_series_text, Format};

type Out = Result<String, Error>;

fn to_json_string<T: serde::Serialize>(value: &T) -> Out {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Io(e.to_string()))
}

pub fn ham(record: &HamiltonianRecord, weight: usize, format: Format) -> Out {
    match format {
        Format::Json => {
            let blocks: Vec<_> = (0..=weight)
                .map(|k| {
                    record.p0_matrix(k).map(|m| {
                        json!({
                            "p": 0,
                            "source_weight": k,
                            "basis": "monomial",
                            "matrix": m,
                        })
                    })
                })
                .collect::<Result<_, _>>()?;
            to_json_string(&json!({
                "m": record.m,
                "provenance": record.provenance,
                "constant_convention": record.constant_convention,
                "density": record.density,
                "p0_blocks": blocks,
            }))
        }
        Format::Latex => {
            let mut out = format!("% h_{{{}}}\n", record.m);
            out.push_str(&format!("h_{{{}}} = {}\n", record.m, density_latex(record)));
            Ok(out)
        }
        _ => {
            let mut out = String::new();
            out.push_str(&format!(
                "h_{} ({:?}, constant: {:?})\n",
                record.m, record.provenance, record.constant_convention
            ));
            out.push_str(&format!("density: {}\n", record.density));
            for k in 0..=weight {
                let m = record.p0_matrix(k)?;
                out.push_str(&format!("p=0 block on weight {} ({}x{}):\n", k, m.rows(), m.cols()));
                out.push_str(&format!("{}", m));
            }
            Ok(out)
        }
    }
}

fn density_latex(record: &HamiltonianRecord) -> String {
    let mut parts = Vec::new();
    for (orders, coeff) in record.density.terms() {
        let mut body = format!("({})", coeff.to_latex());
        for &j in orders {
            body.push_str(&match j {
                0 => " u".to_string(),
                1 => " u_x".to_string(),
                j => format!(" u_{{{}x}}", j),
            });
        }
        parts.push(body);
    }
    parts.join(" + ")
}

pub fn commute(rows: &[(i64, i64, Vec<usize>)], kmax: usize, format: Format) -> Out {
    match format {
        Format::Json => to_json_string(&json!({
            "kmax": kmax,
            "pairs": rows
                .iter()
                .map(|(m, n, bad)| json!({"m": m, "n": n, "nonzero_weights": bad}))
                .collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("m,n,commutes,nonzero_weights\n");
            for (m, n, bad) in rows {
                out.push_str(&format!(
                    "{},{},{},\"{:?}\"\n",
                    m,
                    n,
                    bad.is_empty(),
                    bad
                ));
            }
            Ok(out)
        }
        _ => {
            let mut out = format!("commutators on weights <= {}\n", kmax);
            for (m, n, bad) in rows {
                if bad.is_empty() {
                    out.push_str(&format!("[H_{}, H_{}] = 0 exactly\n", m, n));
                } else {
                    out.push_str(&format!(
                        "[H_{}, H_{}] NONZERO on weights {:?}\n",
                        m, n, bad
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Dispersionless eigenvalues E_m(lambda; hbar, U0) from the closed formula,
/// as polynomials in (h = sqrt hbar, U0).
pub fn eigen(kmax: usize, mmax: i64, format: Format) -> Out {
    use qkdv_core::exact::poly::{ExactPoly, Var};
    use qkdv_core::exact::rat::factorial;
    let table: Vec<(Partition, i64, ExactPoly)> = {
        let mut rows = Vec::new();
        for k in 0..=kmax {
            for lam in enumerate_partitions(k) {
                for m in -1..=mmax {
                    let mut e = ExactPoly::zero();
                    for j in 0..=(m + 2) as usize {
                        let pow = (m + 2) as usize - j;
                        let c = q_function(j, &lam) / factorial(pow);
                        if !c.is_zero() {
                            e.add_term(c, &[(Var::H, j as u16), (Var::U0, pow as u16)]);
                        }
                    }
                    rows.push((lam.clone(), m, e));
                }
            }
        }
        rows
    };
    match format {
        Format::Json => to_json_string(
            &table
                .iter()
                .map(|(lam, m, e)| {
                    json!({"lambda": lam, "m": m, "eigenvalue": e})
                })
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut out = String::from("lambda,m,eigenvalue\n");
            for (lam, m, e) in &table {
                out.push_str(&format!("\"{}\",{},\"{}\"\n", lam, m, e.to_text()));
            }
            Ok(out)
        }
        Format::Latex => {
            let mut out = String::from("\\begin{align*}\n");
            for (lam, m, e) in &table {
                out.push_str(&format!(
                    "E_{{{}}}({}) &= {} \\\\\n",
                    m,
                    partition_label(lam),
                    e.to_latex()
                ));
            }
            out.push_str("\\end{align*}\n");
            Ok(out)
        }
        Format::Text => {
            let mut out = String::new();
            for (lam, m, e) in &table {
                out.push_str(&format!("E_{}({}) = {}\n", m, lam, e.to_text()));
            }
            Ok(out)
        }
    }
}

pub fn deform(rows: &[DeformedSchur], weight: usize, order: usize, format: Format) -> Out {
    let basis = WeightBasis::new(weight);
    match format {
        Format::Json => to_json_string(&json!({
            "weight": weight,
            "order": order,
            "basis": basis.elements,
            "rows": rows,
        })),
        Format::Csv => {
            let mut out = String::from("lambda,nu,sigma_power,coefficient\n");
            for r in rows {
                for (t, coeffs) in r.coeffs.iter().enumerate() {
                    for (nu, c) in basis.elements.iter().zip(coeffs) {
                        if c.is_zero() {
                            continue;
                        }
                        out.push_str(&format!(
                            "\"{}\",\"{}\",{},{}\n",
                            r.lambda,
                            nu,
                            t,
                            rat_display(c)
                        ));
                    }
                }
            }
            Ok(out)
        }
        Format::Latex => {
            // one aligned row per r_lambda, one parenthesized sigma-series
            // per Schur component
            let mut out = String::from("\\begin{align*}\n");
            for r in rows {
                let mut terms = Vec::new();
                for (idx, nu) in basis.elements.iter().enumerate() {
                    let series: Vec<Rat> =
                        (0..=order).map(|t| r.coeffs[t][idx].clone()).collect();
                    if series.iter().all(|c| c.is_zero()) {
                        continue;
                    }
                    let label = format!("s_{{{}}}", latex_partition(nu));
                    if nu == &r.lambda {
                        terms.push(label);
                    } else {
                        terms.push(format!(
                            "{}\\left({}+\\mathcal{{O}}(\\sigma^{{{}}})\\right)",
                            label,
                            sigma_series_text(&series, Format::Latex),
                            order + 1
                        ));
                    }
                }
                out.push_str(&format!(
                    "r_{{{}}} &= {} \\\\\n",
                    latex_partition(&r.lambda),
                    terms.join(" + ")
                ));
            }
            out.push_str("\\end{align*}\n");
            Ok(out)
        }
        Format::Text => {
            let mut out = format!(
                "deformed Schur polynomials, weight {}, through sigma^{}\n",
                weight, order
            );
            for r in rows {
                out.push_str(&format!("r_{} =\n", r.lambda));
                for (idx, nu) in basis.elements.iter().enumerate() {
                    let series: Vec<Rat> =
                        (0..=order).map(|t| r.coeffs[t][idx].clone()).collect();
                    if series.iter().all(|c| c.is_zero()) {
                        continue;
                    }
                    out.push_str(&format!(
                        "  s_{} * ({})\n",
                        nu,
                        sigma_series_text(&series, Format::Text)
                    ));
                }
                for (m, series) in &r.eigen {
                    let rendered: Vec<String> = series
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(t, c)| match t {
                            0 => format!("({})", c.to_text()),
                            1 => format!("({})*sigma", c.to_text()),
                            t => format!("({})*sigma^{}", c.to_text(), t),
                        })
                        .collect();
                    let body = if rendered.is_empty() {
                        "0".to_string()
                    } else {
                        rendered.join(" + ")
                    };
                    out.push_str(&format!("  F_{}: {}\n", m, body));
                }
            }
            Ok(out)
        }
    }
}

fn latex_partition(p: &Partition) -> String {
    let parts: Vec<String> = p.parts().iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

pub fn curve(curve: &SpectralCurve, format: Format) -> Out {
    match format {
        Format::Json => to_json_string(&json!({
            "k": curve.k,
            "m": curve.m,
            "poly": curve.poly,
            "coefficients": curve
                .coefficient_table()
                .iter()
                .map(|(r, s, c)| json!({"rho": r, "sigma": s, "coeff": rat_display(c)}))
                .collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("rho_power,sigma_power,coefficient\n");
            for (r, s, c) in curve.coefficient_table() {
                out.push_str(&format!("{},{},{}\n", r, s, rat_display(&c)));
            }
            Ok(out)
        }
        Format::Latex => Ok(format!(
            "\\Sigma_{{{},{}}}:\\quad {} = 0\n",
            curve.k,
            curve.m,
            curve.poly.to_latex()
        )),
        Format::Text => {
            let mut out = format!(
                "spectral curve k = {}, m = {}: det(rho - K_{}(sigma)) =\n{}\n",
                curve.k, curve.m, curve.m, curve.poly.to_text()
            );
            out.push_str("coefficients (rho_power, sigma_power, value):\n");
            for (r, s, c) in curve.coefficient_table() {
                out.push_str(&format!("  ({}, {}, {})\n", r, s, rat_display(&c)));
            }
            Ok(out)
        }
    }
}

pub fn genus(values: &[i64], format: Format) -> Out {
    match format {
        Format::Json => to_json_string(&values),
        Format::Csv => {
            let mut out = String::from("k,genus_rhs\n");
            for (k, v) in values.iter().enumerate() {
                out.push_str(&format!("{},{}\n", k, v));
            }
            Ok(out)
        }
        _ => {
            let row: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            Ok(format!("{}\n", row.join(" ")))
        }
    }
}

pub fn identities(
    rows: &[(qkdv_core::identities::DegeneratePair, Rat, Rat)],
    kmax: usize,
    format: Format,
) -> Out {
    match format {
        Format::Json => to_json_string(
            &rows
                .iter()
                .map(|(pair, corollary, lemma)| {
                    json!({
                        "k": pair.k,
                        "lambda": pair.lambda,
                        "mu": pair.mu,
                        "shared_p2": rat_display(&qkdv_core::partitions::p_function(2, &pair.lambda)),
                        "character_sum": rat_display(corollary),
                        "eps2_matrix_element": rat_display(lemma),
                    })
                })
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut out = String::from("k,lambda,mu,value\n");
            for (pair, corollary, _) in rows {
                out.push_str(&format!(
                    "{},\"{}\",\"{}\",{}\n",
                    pair.k,
                    pair.lambda,
                    pair.mu,
                    rat_display(corollary)
                ));
            }
            Ok(out)
        }
        _ => {
            let mut out = format!("P_2-degenerate pairs with k <= {}\n", kmax);
            if rows.is_empty() {
                out.push_str("none\n");
            }
            for (pair, corollary, lemma) in rows {
                out.push_str(&format!(
                    "k = {}: ({}, {}): character sum = {}, eps2 matrix element = {}\n",
                    pair.k,
                    pair.lambda,
                    pair.mu,
                    rat_display(corollary),
                    rat_display(lemma)
                ));
            }
            Ok(out)
        }
    }
}

pub fn yjm(report: &PropA1Report, format: Format) -> Out {
    match format {
        Format::Json => to_json_string(report),
        _ => {
            let mut out = format!(
                "class-algebra identity on weight {} through z^{}: ",
                report.k, report.z_order
            );
            if report.is_zero() {
                out.push_str("zero defect\n");
            } else {
                out.push_str(&format!("{} NONZERO entries\n", report.defects.len()));
                for (z, i, j, v) in &report.defects {
                    out.push_str(&format!("  z^{} entry ({}, {}): {}\n", z, i, j, v));
                }
            }
            Ok(out)
        }
    }
}

pub fn chartable(table: &CharacterTable, format: Format) -> Out {
    match format {
        Format::Json => to_json_string(&json!({
            "k": table.k,
            "partitions": table.partitions,
            "values": table.values,
        })),
        _ => Ok(table.to_csv()),
    }
}
