//! Assemble a Lyapunov inequality with the expression builder and solve it.

use ddlmi::linalg::{self, Mat};
use ddlmi::lmi::{scalarize, LmiConstraint, ScalarizeOptions, VariableSpace};
use ddlmi::solve::{solve_feasibility, SolveOptions};

fn main() -> ddlmi::Result<()> {
    let a = Mat::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, 0.0, -0.5, 1.0, 0.0, 0.0, -2.0]);
    let mut vars = VariableSpace::new();
    let p = vars.symmetric("P", 3)?;
    let pe = vars.expr(p);

    // A P + P Aᵀ ≺ 0 and −P ≺ 0
    let lyap = pe.left_mul(&a)?.tr_sym()?;
    let constraints = [LmiConstraint::new("lyapunov", lyap), LmiConstraint::new("P > 0", pe.scale(-1.0))];
    let problem = scalarize(&constraints, &vars, &ScalarizeOptions::default())?;
    let outcome = solve_feasibility(&problem, &SolveOptions::default());
    println!("status {:?} after {} iterations, margin t = {:.3e}", outcome.status, outcome.iterations, outcome.t);

    let pv = vars.value(p, &outcome.assignment);
    println!("P eigenvalues {:?}", linalg::sym_eigenvalues(&pv));
    println!("max eig of A P + P A^T: {:.3e}", linalg::max_eig(&(&a * &pv + &pv * a.transpose())));
    Ok(())
}
