//! gnuplot scripts that read the CSVs written next to them.

use crate::config::ArchitectureKind;

const PREAMBLE: &str = "set datafile separator ','\nset key autotitle columnhead\nset grid\n";

pub fn pareto(kinds: &[ArchitectureKind]) -> String {
    let names: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
    format!(
        "{PREAMBLE}set xlabel 'communication MI (bit/s/Hz)'\nset ylabel 'radar MI (bit)'\n\
         archs = \"{}\"\n\
         plot for [a in archs] 'pareto_median.csv' using (strcol(1) eq a ? $4 : NaN):3 with linespoints title a\n",
        names.join(" ")
    )
}

pub fn se_vs_snr() -> String {
    format!(
        "{PREAMBLE}set xlabel 'SNR (dB)'\nset ylabel 'spectral efficiency (bit/s/Hz)'\n\
         plot 'se_vs_snr.csv' using 1:2 with linespoints title 'fully digital', \\\n\
         \x20    '' using 1:3 with linespoints title 'ADMM', \\\n\
         \x20    '' using 1:4 with linespoints title 'two-stage'\n"
    )
}

pub fn beampattern(n_subcarriers: usize) -> String {
    format!(
        "{PREAMBLE}if (!exists('seed')) seed = 0\nif (!exists('method')) method = 'admm'\n\
         set xlabel 'u = sin(theta)'\nset ylabel 'subcarrier'\nset cblabel 'power (dB)'\n\
         set yrange [-0.5:{}]\nset cbrange [-40:*]\nset view map\n\
         splot 'beampattern.csv' using (strcol(1) eq method && $2 == seed ? $3 : NaN):4:5 \\\n\
         \x20   with points pt 5 ps 0.5 palette notitle\n",
        n_subcarriers as f64 - 0.5
    )
}

pub fn doa() -> String {
    format!(
        "{PREAMBLE}set xlabel 'subcarriers K'\nset ylabel 'resolution threshold (sin-space)'\nset logscale xy\n\
         plot for [s in '10 20 30'] 'doa.csv' using (abs($2 - s) < 1e-9 ? $1 : NaN):3 with linespoints title sprintf('%s dB', s)\n"
    )
}
