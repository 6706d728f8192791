//! Plain-text gnuplot scripts for the emitted data files.

use std::fs;
use std::path::Path;

fn header(data: &Path) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\ndata = '{}'\n",
        data.display()
    )
}

pub fn write_distribution_script(script: &Path, data: &Path, mean: f64, bound: f64) -> std::io::Result<()> {
    let body = format!(
        "{}set xlabel 'spinlabor n'\nset ylabel 'probability'\nset style fill solid 0.5\n\
         set arrow 1 from {mean},graph 0 to {mean},graph 1 nohead lc 'black'\n\
         set arrow 2 from {bound},graph 0 to {bound},graph 1 nohead lc 'magenta'\n\
         plot data using 1:2 with boxes\n",
        header(data)
    );
    fs::write(script, body)
}

pub fn write_histogram_script(script: &Path, data: &Path, shots: u64) -> std::io::Result<()> {
    let body = format!(
        "{}set xlabel 'spinlabor n'\nset ylabel 'frequency'\nset style fill solid 0.5\n\
         plot data using 1:($2/{shots}.0) with boxes\n",
        header(data)
    );
    fs::write(script, body)
}

pub fn write_violation_script(script: &Path, data: &Path) -> std::io::Result<()> {
    let body = format!(
        "{}set xlabel 'epsilon'\nset ylabel 'probability'\n\
         plot data using 1:2 with steps, data using 1:3 with lines\n",
        header(data)
    );
    fs::write(script, body)
}

pub fn write_sweep_script(script: &Path, data: &Path) -> std::io::Result<()> {
    let body = format!(
        "{}set xlabel 'alpha'\nset ylabel 'R'\n\
         plot for [c in system(\"tail -n +2 '\".data.\"' | cut -d, -f1 | sort -un\")] \
         data using (strcol(1) eq c ? $2 : 1/0):11 with linespoints title 'C='.c\n",
        header(data)
    );
    fs::write(script, body)
}
