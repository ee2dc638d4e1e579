//! Companion gnuplot scripts for CSV output. Plain text only; the program
//! never renders anything itself.

use std::path::Path;

use crate::settings::Command;

// 1-based CSV columns, matching the field order of `Record`.
const COL_K: usize = 2;
const COL_M: usize = 3;
const COL_SNR: usize = 4;
const COL_METHOD: usize = 5;
const COL_CAP: usize = 7;
const COL_REL: usize = 13;

const METHODS: &str = "quadrature closed_form approx_low_ratio approx_high_ratio high_snr monte_carlo";

fn header(data: &Path) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\ndata = '{}'\nmethods = \"{METHODS}\"\n",
        data.display()
    )
}

/// Script plotting `data` the way the given command's output is usually read.
pub fn script(cmd: &Command, data: &Path) -> String {
    let mut s = header(data);
    match cmd {
        Command::Grid(_) => {
            s.push_str(&format!(
                "set logscale y\nset xlabel 'm'\nset ylabel 'k'\nset view map\nset contour base\n\
                 set dgrid3d 30,30\nunset surface\nset cntrparam levels incremental 2.3,0.1,3.6\n\
                 splot data using {COL_M}:{COL_K}:{COL_CAP} with lines title 'capacity (bit/s/Hz)'\n"
            ));
        }
        Command::Errors(_) => {
            s.push_str(&format!(
                "set xlabel 'average SNR (dB)'\nset ylabel 'relative error (%)'\n\
                 plot for [meth in methods] data using {COL_SNR}:(strcol({COL_METHOD}) eq meth ? 100*${COL_REL} : NaN) \
                 with points title meth\n"
            ));
        }
        _ => {
            s.push_str(&format!(
                "set xlabel 'average SNR (dB)'\nset ylabel 'capacity (bit/s/Hz)'\n\
                 plot for [meth in methods] data using {COL_SNR}:(strcol({COL_METHOD}) eq meth ? ${COL_CAP} : NaN) \
                 with points title meth\n"
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::Flags;

    #[test]
    fn scripts_reference_the_data_file() {
        let data = Path::new("out.csv");
        for cmd in [Command::Sweep(Flags::default()), Command::Grid(Flags::default()), Command::Errors(Flags::default())] {
            let s = script(&cmd, data);
            assert!(s.contains("data = 'out.csv'"));
            assert!(s.contains("plot "));
        }
    }
}
