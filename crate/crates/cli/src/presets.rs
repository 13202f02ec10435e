//! Scenario files compiled into the binary, addressed as `preset:NAME`.

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $summary:literal) => {
        Preset { name: $name, summary: $summary, text: include_str!(concat!("../presets/", $name, ".scn")) }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("worked-example", "b=5, alpha=0.5, q=1, d=7; T = 2031.171875"),
    preset!("pandemic", "b=8, alpha=0.7, q=0.6, d=5; r = 3.36"),
    preset!("vaccination", "b=5, alpha=0.6, q=0.7, d=6; r = 2.1"),
    preset!("vaccination-friction", "b=5, alpha=0.3, q=0.4, d=6; r = 0.6, M_inf = 2.5"),
    preset!("deterministic-tree", "b=2, alpha=1, q=1, d=3; exactly 14 per trial"),
    preset!("subcritical", "b=2, alpha=0.5, q=0.5, d=6; T = 3.9375"),
    preset!("runaway", "b=5, alpha=1, q=1, d=9; for cap/truncation runs"),
];

pub const PREFIX: &str = "preset:";

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
