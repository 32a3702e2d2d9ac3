use super::tape::{Tape, VarId};
use crate::error::{Error, Result};

/// Denominator floor for the per-coordinate relative error. Gradients below
/// this magnitude are compared absolutely (scaled by the floor), which keeps
/// central-difference roundoff from dominating near-zero coordinates while
/// still flagging any dropped gradient path larger than ~1e-6.
const REL_ERR_FLOOR: f64 = 1e-2;

/// Compares the tape gradient of a scalar-valued graph against central
/// finite differences and returns the worst per-coordinate relative error.
///
/// `build` receives a fresh tape and the input bound as a single leaf; it
/// must return a scalar node. The same closure serves both routes: once with
/// `backward` for the analytic gradient, and 2 * x.len() more times for the
/// difference quotients (f(x + h e_i) - f(x - h e_i)) / 2h.
pub fn grad_check<F>(build: F, x: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&mut Tape, VarId) -> Result<VarId>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!("grad_check: step size {h} must be positive")));
    }
    let mut tape = Tape::new();
    let leaf = tape.leaf(x);
    let out = build(&mut tape, leaf)?;
    if tape.value(out).len() != 1 {
        return Err(Error::Dim("grad_check: build must produce a scalar".into()));
    }
    tape.backward(out)?;
    let analytic = tape.grad(leaf).to_vec();

    let mut probe = x.to_vec();
    let eval = |tape: &mut Tape, xs: &[f64]| -> Result<f64> {
        tape.reset();
        let leaf = tape.leaf(xs);
        let out = build(tape, leaf)?;
        Ok(tape.value(out)[0])
    };

    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let fp = eval(&mut tape, &probe)?;
        probe[i] = orig - h;
        let fm = eval(&mut tape, &probe)?;
        probe[i] = orig;
        let fd = (fp - fm) / (2.0 * h);
        let denom = analytic[i].abs().max(fd.abs()).max(REL_ERR_FLOOR);
        worst = worst.max((analytic[i] - fd).abs() / denom);
    }
    Ok(worst)
}
