//! Standalone gnuplot scripts that reference only the emitted CSV files.

/// One heatmap panel: CSV file, panel title and the symmetric colour range.
pub struct Heatmap {
    pub csv: String,
    pub title: String,
    pub range: f64,
}

const PREAMBLE: &str = "# gnuplot >= 5.4; run from the output directory\nset datafile separator ','\nset datafile columnheaders\n";

fn layout(n: usize) -> (usize, usize) {
    let cols = (1..=n).find(|c| c * c >= n).unwrap_or(1);
    (n.div_ceil(cols), cols)
}

/// Heatmaps of the real part, one per grid, arranged on a near-square layout.
pub fn heatmaps(png: &str, title: &str, panels: &[Heatmap]) -> String {
    let (rows, cols) = layout(panels.len());
    let mut s = String::from(PREAMBLE);
    s += &format!("set terminal pngcairo size {},{}\nset output '{png}'\n", 480 * cols, 440 * rows);
    s += "set size ratio -1\nset xlabel 'Re α'\nset ylabel 'Im α'\nset palette defined (-1 '#2166ac', 0 '#f7f7f7', 1 '#b2182b')\n";
    s += &format!("set multiplot layout {rows},{cols} title '{title}'\n");
    for p in panels {
        let r = if p.range > 0.0 { p.range } else { 1.0 };
        s += &format!("set title '{}'\nset cbrange [{:e}:{:e}]\n", p.title, -r, r);
        s += &format!("plot '{}' using 1:2:3 with image notitle\n", p.csv);
    }
    s += "unset multiplot\n";
    s
}

/// Scaled amplitude `|⟨a(t)⟩| / |⟨a(0)⟩|` against `Ut`, one curve per file.
pub fn revival_lines(png: &str, curves: &[(String, String)]) -> String {
    let mut s = String::from(PREAMBLE);
    s += &format!("set terminal pngcairo size 720,440\nset output '{png}'\n");
    s += "set xlabel 'Ut'\nset ylabel '|<a(t)>| / |<a(0)>|'\nset key top right\n";
    let parts: Vec<String> = curves.iter().map(|(csv, label)| format!("'{csv}' using 2:6 with lines title '{label}'")).collect();
    s += &format!("plot {}\n", parts.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_panels_form_a_square() {
        assert_eq!(layout(1), (1, 1));
        assert_eq!(layout(4), (2, 2));
        assert_eq!(layout(3), (2, 2));
        assert_eq!(layout(5), (2, 3));
        let p: Vec<Heatmap> = (0..4).map(|k| Heatmap { csv: format!("g{k}.csv"), title: format!("{k}"), range: 0.5 }).collect();
        let s = heatmaps("w.png", "W", &p);
        assert!(s.contains("layout 2,2"));
        assert_eq!(s.matches("with image").count(), 4);
    }
}
