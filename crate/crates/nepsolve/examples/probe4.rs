// Development scratch pad; removed before release.
use nepsolve::gallery::{nep_gallery, GalleryParams};
use nepsolve::linalg::cplx;
use nepsolve::nep::SolveOptions;
use nepsolve::solvers::{iar, iar_chebyshev};

fn main() {
    let dep0 = nep_gallery("dep0", &GalleryParams::new()).unwrap();
    let spmf = dep0.to_spmf();

    for tol in [1e-10f64, 1e-8, 1e-6] {
        let mut opts = SolveOptions::default();
        opts.tol = tol;
        opts.maxit = Some(28);
        let c = iar_chebyshev(&spmf, &opts);
        let t = iar(&spmf, &opts);
        let report = |tag: &str, r: &Result<nepsolve::SolveOutcome, nepsolve::SolverError>| match r
        {
            Ok(out) => {
                println!("tol {tol:.0e} {tag}: {} converged", out.eigenpairs.len());
                for (p, e) in out.eigenpairs.iter().zip(&out.residuals) {
                    println!(
                        "    {:+.8} {:+.8}i  err {:.2e}",
                        p.lambda.re, p.lambda.im, e
                    );
                }
            }
            Err(nepsolve::SolverError::NoConvergence { outcome, .. }) => {
                println!("tol {tol:.0e} {tag}: none; top Ritz errors:");
                for (p, e) in outcome.eigenpairs.iter().zip(&outcome.residuals).take(8) {
                    println!(
                        "    {:+.8} {:+.8}i  err {:.2e}",
                        p.lambda.re, p.lambda.im, e
                    );
                }
            }
            Err(e) => println!("tol {tol:.0e} {tag}: {e}"),
        };
        report("cheb", &c);
        report("iar ", &t);
    }

    // Neuron problem with a generous budget, looser tolerance.
    let neuron = nep_gallery("neuron0", &GalleryParams::new()).unwrap();
    let mut nopts = SolveOptions::with_target(cplx(-2.0, 0.0));
    nopts.tol = 1e-10;
    nopts.maxit = Some(90);
    match iar_chebyshev(&neuron, &nopts) {
        Ok(out) => {
            println!("neuron cheb maxit=90 tol=1e-8: {} converged", out.eigenpairs.len());
            let mut ls: Vec<_> = out.eigenpairs.iter().map(|p| p.lambda).collect();
            ls.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
            for l in ls {
                println!("    {:+.6} {:+.6}i", l.re, l.im);
            }
        }
        Err(nepsolve::SolverError::NoConvergence { outcome, .. }) => {
            println!("neuron cheb: none; top Ritz:");
            for (p, e) in outcome.eigenpairs.iter().zip(&outcome.residuals).take(14) {
                println!("    {:+.6} {:+.6}i  err {:.2e}", p.lambda.re, p.lambda.im, e);
            }
        }
        Err(e) => println!("neuron cheb: {e}"),
    }
}
