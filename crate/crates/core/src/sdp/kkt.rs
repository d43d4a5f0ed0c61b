use super::psd::min_eigenvalue;
use super::SdpSolution;
use crate::relax::RelaxationProblem;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `η_kkt`: the largest of
///
/// - the equality violation `‖(y_0 − 1, a_r · y)‖∞ / (1 + ‖b‖∞)`,
/// - the most negative eigenvalue of every `A_k(y)` and `Z_k`, each divided
///   by `1 + ‖·‖_F`,
/// - the dual residual `‖c − Σ_k A_k*(Z_k) − Σ_r ν_r a_r − t e_0‖∞ / (1 + ‖c‖∞)`,
/// - the gap `|L_y(f) − t| / (1 + |L_y(f)| + |t|)`.
pub fn kkt_residual(rp: &RelaxationProblem, sol: &SdpSolution) -> f64 {
    let y = &sol.y_values;
    let mut primal = (y[0] - 1.0).abs();
    for row in &rp.eq_rows {
        primal = primal.max(row.form.eval(y).abs());
    }
    primal /= 2.0;

    let mut cone = 0.0f64;
    for (b, z) in rp.blocks.iter().zip(&sol.dual_blocks) {
        let x = b.matrix(y);
        cone = cone.max((-min_eigenvalue(&x)).max(0.0) / (1.0 + x.norm()));
        cone = cone.max((-min_eigenvalue(z)).max(0.0) / (1.0 + z.norm()));
    }

    let mut c = vec![0.0; rp.npositions()];
    for &(p, v) in &rp.objective.terms {
        c[p] = v;
    }
    let mut res = c.clone();
    for (b, z) in rp.blocks.iter().zip(&sol.dual_blocks) {
        for e in &b.entries {
            let w = if e.row == e.col { 1.0 } else { 2.0 };
            res[e.pos] -= w * e.coef * z[(e.row, e.col)];
        }
    }
    for (row, nu) in rp.eq_rows.iter().zip(&sol.eq_multipliers) {
        for &(p, v) in &row.form.terms {
            res[p] -= nu * v;
        }
    }
    res[0] -= sol.dual_value;
    let dual = inf_norm(&res) / (1.0 + inf_norm(&c));

    let pobj = rp.objective.eval(y);
    let gap = (pobj - sol.dual_value).abs() / (1.0 + pobj.abs() + sol.dual_value.abs());
    primal.max(cone).max(dual).max(gap)
}
