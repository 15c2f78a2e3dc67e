//! Run artifacts for human eyes: ranked importances, readable decision
//! rules, the model-comparison table, and Pythagorean tree drawings.

mod pythagoras;
mod svg;

pub use pythagoras::{layout_tree, PythagoreanSquare};
pub use svg::render_forest_svg;

use crate::evaluation::EvalReport;
use crate::features::FeatureId;
use crate::learners::{gini_importance, ForestModel, TreeModel, TreeNode};
use crate::selection::SelectionReport;
use serde::{Deserialize, Serialize};

/// Bumped when the run summary JSON layout changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Feature importances, largest first; ties break on feature id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub entries: Vec<(FeatureId, f64)>,
}

pub fn importance_table(forest: &ForestModel) -> ImportanceTable {
    let mut entries: Vec<(FeatureId, f64)> = gini_importance(forest).into_iter().collect();
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    ImportanceTable { entries }
}

/// Readable name for a feature id, matching the phrasing used in rule
/// printouts. Unknown ids fall back to themselves.
pub fn display_name(id: &FeatureId) -> &str {
    match id.as_str() {
        "cohesion.cw_overlap_adj" => "content word overlap in adjacent sentences",
        "cohesion.cw_overlap_all" => "content word overlap in all sentences",
        "cohesion.noun_overlap_adj" => "noun overlap in adjacent sentences",
        "cohesion.noun_overlap_all" => "noun overlap in all sentences",
        "cohesion.argument_overlap_adj" => "argument overlap in adjacent sentences",
        "cohesion.argument_overlap_all" => "argument overlap in all sentences",
        "cohesion.anaphor_overlap_adj" => "anaphor overlap in adjacent sentences",
        "cohesion.anaphor_overlap_all" => "anaphor overlap in all sentences",
        "lsa.overlap_adj" => "LSA overlap of adjacent sentences",
        "lsa.overlap_all" => "LSA overlap of all sentences",
        "lsa.given_new" => "LSA given/new ratio",
        "wordinfo.concreteness_all" => "concreteness of all words",
        "wordinfo.concreteness_content" => "concreteness of content words",
        "wordinfo.imageability_all" => "imageability of all words",
        "wordinfo.imageability_content" => "imageability of content words",
        "wordinfo.log_freq_all" => "log word frequency of all words",
        "wordinfo.log_freq_content" => "log word frequency of content words",
        "incidence.pronoun_first_singular" => "first person singular pronoun incidence",
        "incidence.pronoun_first_plural" => "first person plural pronoun incidence",
        "incidence.pronoun_second" => "second person pronoun incidence",
        "incidence.pronoun_third_singular" => "third person singular pronoun incidence",
        "incidence.pronoun_third_plural" => "third person plural pronoun incidence",
        "incidence.pronoun_possessive" => "possessive pronoun incidence",
        "incidence.connectives" => "connective incidence",
        "incidence.connective_causal" => "causal connective incidence",
        "incidence.connective_additive" => "additive connective incidence",
        "incidence.connective_adversative" => "adversative connective incidence",
        "incidence.connective_temporal" => "temporal connective incidence",
        "liwc.auxverb" => "auxiliary verb rate",
        "liwc.modal" => "modal verb rate",
        "liwc.article" => "article rate",
        "liwc.preposition" => "preposition rate",
        "liwc.conjunction" => "conjunction rate",
        "liwc.determiner" => "determiner rate",
        "liwc.number" => "number word rate",
        "liwc.posemo" => "positive emotion rate",
        "liwc.negemo" => "negative emotion rate",
        "liwc.cause" => "causation rate",
        "liwc.focuspast" => "past focus rate",
        "liwc.focuspresent" => "present focus rate",
        "liwc.focusfuture" => "future focus rate",
        "easability.pc_ref_cohesion_z" => "referential cohesion easability (z)",
        "easability.pc_connectivity_z" => "connectivity easability (z)",
        "easability.pc_ref_cohesion_percentile" => "referential cohesion easability (percentile)",
        "easability.pc_connectivity_percentile" => "connectivity easability (percentile)",
        other => other,
    }
}

fn label_name(counts: [usize; 2]) -> &'static str {
    if counts[0] >= counts[1] {
        "HIGH"
    } else {
        "MODERATE"
    }
}

fn collect_rules(node: &TreeNode, conditions: &mut Vec<String>, out: &mut Vec<String>) {
    match node {
        TreeNode::Leaf { counts, .. } => {
            let clause = if conditions.is_empty() {
                "always".to_string()
            } else {
                conditions.join(" and ")
            };
            out.push(format!(
                "{clause} => {} ({} high, {} moderate)",
                label_name(*counts),
                counts[0],
                counts[1]
            ));
        }
        TreeNode::Internal { feature, threshold, left, right, .. } => {
            conditions.push(format!("{} <= {:.3}", display_name(feature), threshold));
            collect_rules(left, conditions, out);
            conditions.pop();
            conditions.push(format!("{} > {:.3}", display_name(feature), threshold));
            collect_rules(right, conditions, out);
            conditions.pop();
        }
    }
}

/// One human-readable rule per leaf, left branches first.
pub fn tree_rules(tree: &TreeModel) -> Vec<String> {
    let mut out = Vec::new();
    collect_rules(&tree.root, &mut Vec::new(), &mut out);
    out
}

/// Everything a finished run reports, in one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    /// Echo of the run configuration as given.
    pub config: serde_json::Value,
    pub seed: u64,
    pub selection: Option<SelectionReport>,
    /// One report per model, in comparison-table order.
    pub models: Vec<EvalReport>,
    pub importance: Option<ImportanceTable>,
    pub best_tree_rules: Vec<String>,
}

pub fn export_run_json(summary: &RunSummary) -> String {
    let mut out = serde_json::to_string_pretty(summary).expect("summary serializes");
    out.push('\n');
    out
}

fn percent(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

/// Model-comparison table: AUC, classification accuracy, F1, precision,
/// recall per model, as percentages.
pub fn comparison_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("model,auc,classification_accuracy,f1,precision,recall\n");
    for report in reports {
        let auc = report.auc.map(percent).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            report.model,
            auc,
            percent(report.accuracy),
            percent(report.f1),
            percent(report.precision),
            percent(report.recall),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::learners::{fit_forest, ForestParams, Prediction, TreeParams, FORMAT_VERSION};

    fn leaf(h: usize, m: usize) -> TreeNode {
        TreeNode::Leaf { counts: [h, m], n: h + m }
    }

    #[test]
    fn importance_table_is_sorted_and_normalized() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, 0.5]).collect();
        let labels: Vec<Label> = (0..30)
            .map(|i| if i < 15 { Label::Moderate } else { Label::High })
            .collect();
        let features = vec![FeatureId::new("signal"), FeatureId::new("flat")];
        let forest = fit_forest(&rows, &labels, &features, &ForestParams::default(), 3).unwrap();
        let table = importance_table(&forest);
        assert_eq!(table.entries[0].0.as_str(), "signal");
        let total: f64 = table.entries.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() <= 1e-9);
        for w in table.entries.windows(2) {
            assert!(w[0].1 >= w[1].1);
        }
    }

    #[test]
    fn display_names_cover_registry_and_fall_back() {
        for id in crate::features::extended_registry() {
            assert_ne!(display_name(&id), id.as_str(), "no phrase for {id:?}");
        }
        let unknown = FeatureId::new("custom.thing");
        assert_eq!(display_name(&unknown), "custom.thing");
    }

    #[test]
    fn rules_print_in_paper_style() {
        let root = TreeNode::Internal {
            feature: FeatureId::new("cohesion.noun_overlap_all"),
            feature_index: 0,
            threshold: 0.23,
            counts: [13, 7],
            left: Box::new(leaf(1, 5)),
            right: Box::new(leaf(12, 2)),
        };
        let tree = TreeModel {
            format_version: FORMAT_VERSION,
            features: vec![FeatureId::new("cohesion.noun_overlap_all")],
            params: TreeParams::default(),
            root,
        };
        let rules = tree_rules(&tree);
        assert_eq!(
            rules,
            vec![
                "noun overlap in all sentences <= 0.230 => MODERATE (1 high, 5 moderate)",
                "noun overlap in all sentences > 0.230 => HIGH (12 high, 2 moderate)",
            ]
        );
    }

    #[test]
    fn single_leaf_rule_is_unconditional() {
        let tree = TreeModel {
            format_version: FORMAT_VERSION,
            features: vec![],
            params: TreeParams::default(),
            root: leaf(4, 9),
        };
        assert_eq!(tree_rules(&tree), vec!["always => MODERATE (4 high, 9 moderate)"]);
    }

    fn sample_report(model: &str, accuracy: f64) -> EvalReport {
        let labels = [Label::High, Label::Moderate];
        let predictions = [Prediction::from_score(0.9), Prediction::from_score(0.1)];
        let mut report = crate::evaluation::evaluate(&predictions, &labels).unwrap();
        report.model = model.to_string();
        report.accuracy = accuracy;
        report
    }

    #[test]
    fn comparison_csv_mirrors_table_shape() {
        let mut report = sample_report("random_forest", 0.905);
        report.auc = Some(0.945);
        report.f1 = 0.905;
        report.precision = 0.907;
        report.recall = 0.905;
        let csv = comparison_csv(&[report]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "model,auc,classification_accuracy,f1,precision,recall"
        );
        assert_eq!(
            lines.next().unwrap(),
            "random_forest,94.5%,90.5%,90.5%,90.7%,90.5%"
        );
    }

    #[test]
    fn missing_auc_leaves_an_empty_cell() {
        let mut report = sample_report("ridge", 1.0);
        report.auc = None;
        let csv = comparison_csv(&[report]);
        assert!(csv.lines().nth(1).unwrap().starts_with("ridge,,100.0%"));
    }

    #[test]
    fn run_summary_round_trips() {
        let summary = RunSummary {
            schema_version: REPORT_SCHEMA_VERSION,
            config: serde_json::json!({"seed": 7, "k": 10}),
            seed: 7,
            selection: None,
            models: vec![sample_report("lasso", 1.0)],
            importance: Some(ImportanceTable {
                entries: vec![(FeatureId::new("liwc.cause"), 1.0)],
            }),
            best_tree_rules: vec!["always => HIGH (1 high, 0 moderate)".into()],
        };
        let json = export_run_json(&summary);
        let back: RunSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, summary);
        // A second pass through the serializer changes nothing.
        assert_eq!(export_run_json(&back), json);
    }
}
