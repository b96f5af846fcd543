use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct StudyInfo {
    pub name: &'static str,
    pub anchor: &'static str,
    pub required: &'static [&'static str],
    pub summary: &'static str,
}

pub const STUDIES: &[StudyInfo] = &[
    StudyInfo {
        name: "kernels",
        anchor: "Assumption 2.3 and the stable-process Example (ball kernels)",
        required: &["process", "study.n"],
        summary: "Poisson-kernel normalization, Dynkin identity on the unit ball, exit time and exit radius law",
    },
    StudyInfo {
        name: "oscillation",
        anchor: "Lemma 4.4 (oscillation reduction)",
        required: &[
            "process",
            "domain",
            "boundary.x0",
            "study.f",
            "study.g",
            "study.radii",
            "study.m_points",
            "study.n",
            "study.batches",
        ],
        summary: "relative oscillation sup/inf of f/g on shrinking balls and its per-octave contraction factor",
    },
    StudyInfo {
        name: "boundary-limit",
        anchor: "Theorem 3.1",
        required: &[
            "process",
            "domain",
            "boundary.x0",
            "boundary.radius",
            "study.f",
            "study.g",
            "study.radii",
            "study.n_outer",
            "study.n_inner",
        ],
        summary: "boundary limit of f/g as a ratio of ring functionals",
    },
    StudyInfo {
        name: "accessibility",
        anchor: "Remark 3.2",
        required: &[
            "process",
            "domain",
            "boundary.x0",
            "boundary.radius",
            "study.radii",
            "study.n_outer",
            "study.n_inner",
        ],
        summary: "accessible or inaccessible boundary point from the growth of the exit-time ring functional",
    },
    StudyInfo {
        name: "martin",
        anchor: "Martin kernel as a boundary limit of Green ratios; inaccessible-point formula of Theorem 3.7(b)",
        required: &[
            "process",
            "domain",
            "boundary.xref",
            "study.x",
            "study.z",
            "study.deltas",
            "study.n",
        ],
        summary: "Martin kernel by Green-ratio extrapolation, against the closed form on balls and the inaccessible-point integral",
    },
    StudyInfo {
        name: "counterexample",
        anchor: "Example: Brownian motion plus a stable process (mixture), where f/g has no limit",
        required: &["process", "study.c1", "study.c2", "study.xs", "study.n"],
        summary: "gap f(x)/g(x) - f(-x)/g(-x) on the punctured interval",
    },
];

pub fn text() -> String {
    let mut s = String::new();
    for st in STUDIES {
        s.push_str(&format!("{:<16} {}\n", st.name, st.anchor));
        s.push_str(&format!("{:<16} {}\n", "", st.summary));
        s.push_str(&format!("{:<16} requires: {}\n", "", st.required.join(", ")));
    }
    s
}

pub fn json() -> String {
    serde_json::to_string_pretty(STUDIES).expect("static catalog serializes")
}
