use ptheta::{build_loop, track_zero, LoopKind, Precision};
use rug::Complex;

fn main() {
    let prec = Precision::default();
    let path = build_loop(LoopKind::Gamma(1), 0.1, 0.0, 0.0, &prec).unwrap();
    println!("segments: {}", path.segments.len());
    for (label, z0) in [("xi2", -99.85789301361329), ("xi3", -1000.001418305919896)] {
        let z = Complex::with_val(64, (z0, 0.0));
        match track_zero(&path, &z, &prec) {
            Ok(tr) => {
                println!(
                    "{label}: {} samples, end ({:.6}, {:.6})",
                    tr.samples.len(),
                    tr.end.real().to_f64(),
                    tr.end.imag().to_f64()
                );
                for s in tr.samples.iter().step_by(tr.samples.len() / 12 + 1) {
                    println!(
                        "  t={:7.4} q=({:.4},{:.4}) z=({:10.4}, {:8.4}) res={:.1e}",
                        s.t, s.q_re, s.q_im, s.z_re, s.z_im, s.residual
                    );
                }
            }
            Err(e) => println!("{label}: ERR {e:?}"),
        }
    }
}
