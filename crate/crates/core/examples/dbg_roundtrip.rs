use warmrec_core::model::*;
use warmrec_core::synthgen::*;
use warmrec_core::textmine::*;

fn main() {
    let mut cluster_blueprint = Vec::new();
    let mut rule_blueprint = Vec::new();
    let mut text_blueprint = std::collections::BTreeMap::new();
    for t in 1..=3 {
        let q = format!("/q{t}");
        let good1 = format!("/good-{t}-1");
        let good2 = format!("/good-{t}-2");
        cluster_blueprint.push(vec![q.clone(), good1.clone(), good2.clone()]);
        rule_blueprint.push(RulePattern { body: vec![q.clone(), format!("/a-dec{t}a")], head: format!("/a-dec{t}b") });
        for page in [&q, &good1, &good2] {
            text_blueprint.insert(page.clone(), format!("topic{t} theme material"));
        }
    }
    let spec = SynthSpec { session_count: 60, cluster_blueprint, rule_blueprint, text_blueprint, noise: 0.05, rng_seed: 3, ..SynthSpec::default() };
    let output = generate(&spec).unwrap();
    let corpus = DocumentCorpus::from_texts(&output.corpus_text, default_stopwords());
    let config = Config { min_wsupport: 0.02, min_wconf: 0.05, cluster_threshold: 0.4, ..Config::default() };
    let model = train_model(&output.log, output.sitemap.clone(), corpus, config).unwrap();
    let json = model.to_json().unwrap();
    let back = ModelBundle::from_json(&json).unwrap();
    for (k, v) in &model.page_weights.duration_score {
        let b = back.page_weights.duration_score[k];
        if v != &b { println!("duration {k}: {v:?} vs {b:?}"); }
    }
    for (k, v) in &model.page_weights.frequency_score {
        let b = back.page_weights.frequency_score[k];
        if v != &b { println!("frequency {k}: {v:?} vs {b:?}"); }
    }
    for (k, v) in &model.page_weights.weight {
        let b = back.page_weights.weight[k];
        if v != &b { println!("weight {k}: {v:?} vs {b:?}"); }
    }
    println!("keys d {} vs {}", model.page_weights.duration_score.len(), back.page_weights.duration_score.len());
    println!("keys f {} vs {}", model.page_weights.frequency_score.len(), back.page_weights.frequency_score.len());
    println!("keys w {} vs {}", model.page_weights.weight.len(), back.page_weights.weight.len());
    println!("done");
}
