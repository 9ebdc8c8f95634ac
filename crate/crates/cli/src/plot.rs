//! gnuplot scripts that read the emitted CSVs.

use std::fmt::Write as _;

use crate::output::TOOL;

/// Fringe traces against `Γ′t` with an inset comparing the first reservoir
/// with its Markovian trace over the first fifth of the range.
/// `labels[i]` names the reservoir plotted from CSV column `i + 3`.
pub fn fringe_script(labels: &[String], inset_label: &str, markovian_column: usize, inset_end: f64) -> String {
    const DASH: [u32; 3] = [1, 2, 3];
    let mut s = format!(
        "# {TOOL}: fringe visibility\n\
         set datafile separator ','\n\
         set terminal pngcairo size 900,650\n\
         set output 'fringe.png'\n\
         set multiplot\n\
         set xlabel \"Γ′t\"\n\
         set ylabel 'F'\n\
         set key top right\n\
         plot \\\n"
    );
    let lines: Vec<String> = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            format!(
                "  'fringe.csv' using 1:{} with lines lw 2 dt {} title '{label}'",
                i + 3,
                DASH[i % DASH.len()]
            )
        })
        .collect();
    s.push_str(&lines.join(", \\\n"));
    s.push('\n');
    let _ = write!(
        s,
        "set origin 0.45,0.45\n\
         set size 0.4,0.4\n\
         set xrange [0:{inset_end}]\n\
         unset xlabel\n\
         unset ylabel\n\
         set key bottom left\n\
         plot 'fringe.csv' using 1:{markovian_column} with lines lw 2 dt 1 title '{inset_label} Markovian', \\\n  \
         'fringe.csv' using 1:3 with lines lw 2 dt 3 title '{inset_label} non-Markovian'\n\
         unset multiplot\n"
    );
    s
}

/// One panel per reservoir: the ratio as a colour map with the `ratio = 1`
/// contour drawn bold. Rows of `zeno_map.csv` are grouped by `r`, and awk
/// inserts the blank lines gnuplot needs between scans.
pub fn zeno_script(labels: &[String]) -> String {
    let n = labels.len();
    let mut s = format!(
        "# {TOOL}: QZE/AZE maps\n\
         set datafile separator ','\n\
         set terminal pngcairo size {},500\n\
         set output 'zeno_map.png'\n\
         set multiplot layout 1,{n}\n\
         set view map\n\
         set logscale x\n\
         set xlabel 'ω_c τ'\n\
         set ylabel 'r'\n\
         set pm3d at b\n\
         set cbrange [0:2]\n\
         set palette defined (0 'blue', 1 'white', 2 'red')\n\
         set contour base\n\
         set cntrparam levels discrete 1\n\
         unset surface\n",
        450 * n.max(1)
    );
    for label in labels {
        let _ = write!(
            s,
            "set title '{label}'\n\
             splot \"< awk -F, '$1 == \\\"{label}\\\" {{ if ($2 != last && NR > 1) print \\\"\\\"; last = $2; print }}' zeno_map.csv\" \
             using 3:2:4 with pm3d notitle, \\\n  \
             \"< awk -F, '$1 == \\\"{label}\\\" {{ if ($2 != last && NR > 1) print \\\"\\\"; last = $2; print }}' zeno_map.csv\" \
             using 3:2:4 with lines lw 3 lc 'black' nosurface title 'ratio = 1'\n"
        );
    }
    s.push_str("unset multiplot\n");
    s
}
