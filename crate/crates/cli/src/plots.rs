use std::fs;
use std::path::Path;

use anyhow::Result;

const TRAJECTORY: &str = r#"set datafile separator ","
set key autotitle columnhead
set xlabel "t (au)"
set multiplot layout 3,1 title "@NAME@"
set ylabel "P_ground"
plot "trajectory.csv" using 1:2 with lines lw 2 notitle
set ylabel "<L_z>"
plot "trajectory.csv" using 1:4 with lines lw 2 notitle
set ylabel "<r> (au)"
plot "trajectory.csv" using 1:5 with lines title "x", "" using 1:6 with lines title "y", "" using 1:7 with lines title "z"
unset multiplot
pause -1
"#;

const SPECTRUM: &str = r#"set datafile separator ","
set title "@NAME@: P_{L,M} of the excited part"
set xlabel "M"
set ylabel "L"
set cblabel "log10 P"
set view map
set xrange [-8.5:8.5]
set yrange [-0.5:8.5]
plot "spectrum.csv" every ::1 using 2:1:(log10($3 > 1e-300 ? $3 : 1e-300)) with points pt 5 ps 3 palette notitle
pause -1
"#;

const PROJECTION: &str = r#"set datafile separator ","
set title "@NAME@: excited density integrated over z"
set xlabel "x (grid index)"
set ylabel "y (grid index)"
set size ratio -1
plot "projection_excited.csv" matrix using 2:1:3 with image notitle
pause -1
"#;

const COMPLIANCE: &str = r#"set datafile separator ","
set title "@NAME@: weight outside the selection-rule closure"
set xlabel "t (au)"
set ylabel "forbidden fraction"
set logscale y
plot "compliance_trajectory.csv" using 1:5 with lines lw 2 notitle
pause -1
"#;

/// Writes one gnuplot script per figure next to the data.
pub fn write_all(out: &Path, name: &str, compliance: bool) -> Result<()> {
    let mut scripts = vec![("trajectory.gp", TRAJECTORY), ("spectrum.gp", SPECTRUM), ("projection.gp", PROJECTION)];
    if compliance {
        scripts.push(("compliance.gp", COMPLIANCE));
    }
    for (file, body) in scripts {
        fs::write(out.join(file), body.replace("@NAME@", name))?;
    }
    Ok(())
}
