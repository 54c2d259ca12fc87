//! Deterministic synthetic life-science federation.
//!
//! Twenty-nine datasets named after the Bio2RDF collection, each with its own
//! resource namespace and vocabulary, cross-linked through shared entity
//! indices (drug `i` in one dataset is linked to drug `i` in another) and a
//! few vocabularies used by many members (`rdf:type`, `rdfs:label`,
//! `owl:sameAs`, `dc:title`, BioPAX).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{default_hybrid, BenchConfig, OutputPaths, Scenario};
use super::corpus::{builtin_corpus, write_corpus, CorpusQuery};
use crate::endpoint::{FederationConfig, MemberConfig};
use crate::rdf::{write_ntriples, Store, Term, Triple, XSD_DECIMAL};
use crate::service::{BindingConfig, ServiceConfig};
use crate::sparql::{evaluate, merge_stores};

pub const BASE: &str = "http://fedmesh.example/";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const RDFS_SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
pub const DC_TITLE: &str = "http://purl.org/dc/elements/1.1/title";
pub const SKOS_PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
pub const BIOPAX: &str = "http://www.biopax.org/release/biopax-level2.owl#";

/// Dataset names in member order for a 29-member federation.
pub const DATASETS: [&str; 29] = [
    "cellmap",
    "chebi",
    "dailymed",
    "diseaseontology",
    "dbpedia",
    "diseasome",
    "drugbank",
    "entrezgene",
    "genewiki",
    "kegg",
    "mappings",
    "pubmed",
    "umls",
    "uniprot",
    "biogrid",
    "geneontology",
    "hapmap",
    "hprd",
    "humancyc",
    "imid",
    "intact",
    "lhgdn",
    "linkedct",
    "mint",
    "ncinature",
    "phenotypeontology",
    "reactome",
    "sider",
    "symptom",
];

/// Members placed behind added latency in the hybrid scenario.
pub const DELAYED_MEMBERS: [&str; 3] = ["drugbank", "uniprot", "pubmed"];

/// Default entity-count scale; yields roughly 5k to 50k triples per dataset.
pub const DEFAULT_SCALE: usize = 2000;

const CHROMOSOMES: [&str; 24] = [
    "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "13", "14", "15", "16", "17", "18", "19", "20",
    "21", "22", "X", "Y",
];

pub fn resource(dataset: &str, kind: &str, i: usize) -> Term {
    Term::iri(format!("{BASE}{dataset}/resource/{kind}{i}")).expect("valid IRI")
}

pub fn vocab(dataset: &str, term: &str) -> Term {
    Term::iri(format!("{BASE}{dataset}/vocab#{term}")).expect("valid IRI")
}

pub fn taxon(id: u32) -> Term {
    Term::iri(format!("{BASE}taxonomy/{id}")).expect("valid IRI")
}

fn iri(s: &str) -> Term {
    Term::iri(s).expect("valid IRI")
}

fn biopax(term: &str) -> Term {
    iri(&format!("{BIOPAX}{term}"))
}

fn b2r(term: &str) -> Term {
    vocab("bio2rdf", term)
}

/// Entity counts derived from the scale.
#[derive(Debug, Clone, Copy)]
struct Sizes {
    drugs: usize,
    targets: usize,
    proteins: usize,
    genes: usize,
    diseases: usize,
    compounds: usize,
    pathways: usize,
    articles: usize,
    go_terms: usize,
    side_effects: usize,
    trials: usize,
}

impl Sizes {
    fn new(n: usize) -> Self {
        let n = n.max(10);
        Sizes {
            drugs: n,
            targets: (n / 2).max(2),
            proteins: n,
            genes: n,
            diseases: (n / 2).max(2),
            compounds: n,
            pathways: (n / 10).max(3),
            articles: n,
            go_terms: (n / 2).max(3),
            side_effects: (n / 5).max(3),
            trials: (n / 2).max(2),
        }
    }
}

struct Gen {
    rng: ChaCha8Rng,
    sz: Sizes,
    n: usize,
    out: Vec<Triple>,
}

impl Gen {
    fn add(&mut self, s: Term, p: Term, o: Term) {
        self.out.push(Triple::new(s, p, o).expect("generator emits valid triples"));
    }

    fn ty(&mut self, s: &Term, class: Term) {
        self.add(s.clone(), iri(RDF_TYPE), class);
    }

    fn label(&mut self, s: &Term, text: String) {
        self.add(s.clone(), iri(RDFS_LABEL), Term::literal(text));
    }

    fn pick(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper.max(1))
    }

    fn decimal(&mut self, lo: f64, hi: f64) -> Term {
        let v: f64 = self.rng.random_range(lo..hi);
        Term::typed_literal(format!("{v:.2}"), XSD_DECIMAL)
    }
}

fn drugbank(g: &mut Gen) {
    let ds = "drugbank";
    let sz = g.sz;
    for d in 0..sz.drugs {
        let drug = resource(ds, "drug", d);
        g.ty(&drug, vocab(ds, "drugs"));
        g.label(&drug, format!("Drug {d}"));
        g.add(drug.clone(), vocab(ds, "genericName"), Term::literal(format!("generic-{d}")));
        g.add(drug.clone(), vocab(ds, "casRegistryNumber"), Term::literal(format!("cas-{d}")));
        g.add(drug.clone(), vocab(ds, "drugCategory"), resource(ds, "category", d % 10));
        let organism = if d % 2 == 0 { "Humans and other mammals" } else { "Bacteria" };
        g.add(drug.clone(), vocab(ds, "affectedOrganism"), Term::literal(organism));
        if d % 3 == 0 {
            let mp = g.decimal(20.0, 300.0);
            g.add(drug.clone(), vocab(ds, "meltingPoint"), mp);
        }
        if d % 4 == 0 {
            g.add(drug.clone(), vocab(ds, "biotransformation"), Term::literal(format!("hepatic route {}", d % 7)));
        }
        g.add(drug.clone(), vocab(ds, "keggCompoundId"), resource("kegg", "compound", d));
        g.add(drug.clone(), iri(OWL_SAME_AS), resource("dbpedia", "drug", d));
        g.add(drug.clone(), b2r("xRef"), Term::literal(format!("cas-{d}")));
        let targets = 1 + g.pick(3);
        for _ in 0..targets {
            let t = g.pick(sz.targets);
            g.add(drug.clone(), vocab(ds, "target"), resource(ds, "target", t));
        }
    }
    for t in 0..sz.targets {
        let target = resource(ds, "target", t);
        g.ty(&target, vocab(ds, "targets"));
        g.add(target.clone(), vocab(ds, "geneName"), Term::literal(format!("GENE{}", t % sz.genes)));
        let p = (t * 7) % sz.proteins;
        g.add(target.clone(), vocab(ds, "swissprotId"), resource("uniprot", "protein", p));
    }
    for i in 0..sz.drugs {
        let int = resource(ds, "interaction", i);
        let (a, b) = (g.pick(sz.drugs), g.pick(sz.drugs));
        g.add(int.clone(), vocab(ds, "interactionDrug1"), resource(ds, "drug", a));
        g.add(int.clone(), vocab(ds, "interactionDrug2"), resource(ds, "drug", b));
        g.add(int, vocab(ds, "text"), Term::literal(format!("drug{a} may alter the effect of drug{b}")));
    }
}

fn uniprot(g: &mut Gen) {
    let ds = "uniprot";
    let sz = g.sz;
    for p in 0..sz.proteins {
        let prot = resource(ds, "protein", p);
        g.ty(&prot, vocab(ds, "Protein"));
        g.label(&prot, format!("Protein P{p}"));
        let human = p % 3 != 0;
        let suffix = if human { "HUMAN" } else { "MOUSE" };
        g.add(prot.clone(), vocab(ds, "mnemonic"), Term::literal(format!("P{p}_{suffix}")));
        g.add(prot.clone(), vocab(ds, "organism"), taxon(if human { 9606 } else { 10090 }));
        g.add(prot.clone(), vocab(ds, "encodedBy"), resource("entrezgene", "gene", p % sz.genes));
        for _ in 0..1 + g.pick(2) {
            let o = g.pick(sz.go_terms);
            g.add(prot.clone(), vocab(ds, "classifiedWith"), resource("geneontology", "term", o));
        }
        let a = g.pick(sz.articles);
        g.add(prot, vocab(ds, "citation"), resource("pubmed", "article", a));
    }
}

fn pubmed(g: &mut Gen) {
    let ds = "pubmed";
    for a in 0..g.sz.articles {
        let art = resource(ds, "article", a);
        g.ty(&art, vocab(ds, "Article"));
        g.add(art.clone(), iri(DC_TITLE), Term::literal(format!("Study {a} of gene regulation")));
        let year = 1990 + g.pick(25) as i64;
        g.add(art.clone(), vocab(ds, "year"), Term::integer(year));
        g.add(art.clone(), vocab(ds, "meshHeading"), Term::literal(format!("heading-{}", a % 40)));
        for k in 0..2 {
            g.add(art.clone(), vocab(ds, "author"), Term::literal(format!("Author {}", (a + k * 13) % 97)));
        }
    }
}

fn entrezgene(g: &mut Gen) {
    let ds = "entrezgene";
    for i in 0..g.sz.genes {
        let gene = resource(ds, "gene", i);
        g.ty(&gene, vocab(ds, "Gene"));
        g.label(&gene, format!("gene GENE{i}"));
        g.add(gene.clone(), vocab(ds, "symbol"), Term::literal(format!("GENE{i}")));
        g.add(gene.clone(), vocab(ds, "chromosome"), Term::literal(CHROMOSOMES[i % CHROMOSOMES.len()]));
        g.add(gene.clone(), vocab(ds, "taxon"), taxon(if i % 5 != 0 { 9606 } else { 10090 }));
        let kind = if i % 3 != 0 { "protein-coding" } else { "pseudo" };
        g.add(gene, vocab(ds, "geneType"), Term::literal(kind));
    }
}

fn kegg(g: &mut Gen) {
    let ds = "kegg";
    let sz = g.sz;
    for d in 0..sz.drugs {
        let drug = resource(ds, "drug", d);
        g.ty(&drug, vocab(ds, "Drug"));
        g.add(drug.clone(), iri(DC_TITLE), Term::literal(format!("KEGG drug {d}")));
        if d % 2 == 0 {
            g.add(drug.clone(), vocab(ds, "casNumber"), Term::literal(format!("cas-{d}")));
        }
        g.add(drug.clone(), b2r("xRef"), Term::literal(format!("cas-{d}")));
        let mass = g.decimal(1.0, 900.0);
        g.add(drug, b2r("mass"), mass);
    }
    for c in 0..sz.compounds {
        let cpd = resource(ds, "compound", c);
        g.ty(&cpd, vocab(ds, "Compound"));
        g.label(&cpd, format!("compound C{c}"));
        g.add(cpd.clone(), vocab(ds, "formula"), Term::literal(format!("C{}H{}O{}", c % 30 + 1, c % 50, c % 9)));
        let w = g.pick(sz.pathways);
        g.add(cpd, vocab(ds, "pathway"), resource(ds, "pathway", w));
    }
    for w in 0..sz.pathways {
        let pw = resource(ds, "pathway", w);
        g.ty(&pw, vocab(ds, "Pathway"));
        g.add(pw, iri(DC_TITLE), Term::literal(format!("KEGG pathway {w}")));
    }
}

fn chebi(g: &mut Gen) {
    let ds = "chebi";
    for c in 0..g.sz.compounds {
        let cpd = resource(ds, "compound", c);
        g.ty(&cpd, vocab(ds, "Compound"));
        g.label(&cpd, format!("chebi compound {c}"));
        g.add(cpd.clone(), vocab(ds, "formula"), Term::literal(format!("C{}H{}O{}", c % 30 + 1, c % 50, c % 9)));
        let mass = g.decimal(1.0, 900.0);
        g.add(cpd.clone(), b2r("mass"), mass);
        if c % 3 == 0 {
            g.add(cpd, b2r("xRef"), Term::literal(format!("cas-{c}")));
        }
    }
}

fn dbpedia(g: &mut Gen) {
    let ds = "dbpedia";
    let sz = g.sz;
    for d in 0..sz.drugs {
        let drug = resource(ds, "drug", d);
        g.ty(&drug, vocab(ds, "Drug"));
        g.label(&drug, format!("Drug {d} (dbpedia)"));
        g.add(drug.clone(), vocab(ds, "casNumber"), Term::literal(format!("cas-{d}")));
        g.add(drug, vocab(ds, "abstract"), Term::lang_literal(format!("Drug {d} is a medication."), "en"));
    }
    for s in 0..sz.diseases {
        let dis = resource(ds, "disease", s);
        g.ty(&dis, vocab(ds, "Disease"));
        g.label(&dis, format!("Disease {s}"));
        g.add(dis.clone(), vocab(ds, "meshId"), Term::literal(format!("D{s:05}")));
        g.add(dis, vocab(ds, "abstract"), Term::lang_literal(format!("Disease {s} is a condition."), "en"));
    }
}

fn dailymed(g: &mut Gen) {
    let ds = "dailymed";
    let sz = g.sz;
    for d in 0..sz.drugs * 3 / 4 {
        let drug = resource(ds, "drug", d);
        g.ty(&drug, vocab(ds, "drugs"));
        g.add(drug.clone(), vocab(ds, "name"), Term::literal(format!("Brand {d}")));
        g.add(drug.clone(), vocab(ds, "genericDrug"), resource("drugbank", "drug", d));
        g.add(drug.clone(), vocab(ds, "activeIngredient"), resource(ds, "ingredient", d % 50));
        let s = g.pick(sz.diseases);
        g.add(drug, vocab(ds, "possibleDiseaseTarget"), resource("diseasome", "disease", s));
    }
    for i in 0..50.min(sz.drugs) {
        let ing = resource(ds, "ingredient", i);
        g.label(&ing, format!("ingredient {i}"));
    }
}

fn diseasome(g: &mut Gen) {
    let ds = "diseasome";
    let sz = g.sz;
    for s in 0..sz.diseases {
        let dis = resource(ds, "disease", s);
        g.ty(&dis, vocab(ds, "diseases"));
        g.label(&dis, format!("Disease {s}"));
        g.add(dis.clone(), vocab(ds, "class"), Term::literal(format!("class{}", s % 8)));
        for _ in 0..1 + g.pick(3) {
            let gene = g.pick(sz.genes);
            g.add(dis.clone(), vocab(ds, "associatedGene"), resource(ds, "gene", gene));
        }
        let d = g.pick(sz.drugs);
        g.add(dis.clone(), vocab(ds, "possibleDrug"), resource("drugbank", "drug", d));
        g.add(dis, iri(OWL_SAME_AS), resource("dbpedia", "disease", s));
    }
    for i in 0..sz.genes {
        let gene = resource(ds, "gene", i);
        g.ty(&gene, vocab(ds, "genes"));
        g.label(&gene, format!("GENE{i}"));
        g.add(gene, vocab(ds, "entrezRef"), resource("entrezgene", "gene", i));
    }
}

fn genewiki(g: &mut Gen) {
    let ds = "genewiki";
    for i in 0..g.sz.genes {
        let page = resource(ds, "gene", i);
        g.ty(&page, vocab(ds, "Article"));
        g.label(&page, format!("GENE{i} (gene wiki)"));
        g.add(page.clone(), iri(OWL_SAME_AS), resource("entrezgene", "gene", i));
        g.add(page.clone(), vocab(ds, "summary"), Term::lang_literal(format!("GENE{i} encodes a protein."), "en"));
        g.add(page, vocab(ds, "revision"), Term::integer((i * 31 % 1000) as i64));
    }
}

fn diseaseontology(g: &mut Gen) {
    let ds = "diseaseontology";
    let count = g.n;
    for s in 0..count {
        let term = resource(ds, "term", s);
        g.ty(&term, vocab(ds, "Term"));
        g.label(&term, format!("disease term {s}"));
        if s > 0 {
            g.add(term.clone(), iri(RDFS_SUBCLASS), resource(ds, "term", s / 4));
        }
        g.add(term.clone(), vocab(ds, "umlsRef"), resource("umls", "concept", s));
        g.add(term, vocab(ds, "synonym"), Term::literal(format!("synonym {s}")));
    }
}

fn umls(g: &mut Gen) {
    let ds = "umls";
    for c in 0..g.n {
        let concept = resource(ds, "concept", c);
        g.ty(&concept, vocab(ds, "Concept"));
        g.add(concept.clone(), iri(SKOS_PREF_LABEL), Term::literal(format!("concept {c}")));
        g.add(concept.clone(), vocab(ds, "semanticType"), Term::literal(format!("T{:03}", c % 30)));
        g.add(concept, vocab(ds, "cui"), Term::literal(format!("C{c:07}")));
    }
}

fn mappings(g: &mut Gen) {
    let sz = g.sz;
    for c in 0..sz.compounds {
        g.add(resource("kegg", "compound", c), iri(OWL_SAME_AS), resource("chebi", "compound", c));
        g.add(resource("chebi", "compound", c), iri(OWL_SAME_AS), resource("kegg", "compound", c));
    }
    for d in (0..sz.drugs).step_by(2) {
        g.add(resource("kegg", "drug", d), iri(OWL_SAME_AS), resource("dbpedia", "drug", d));
    }
    for s in 0..sz.diseases {
        g.add(resource("diseaseontology", "term", s), iri(OWL_SAME_AS), resource("diseasome", "disease", s));
    }
}

fn geneontology(g: &mut Gen) {
    let ds = "geneontology";
    let spaces = ["biological_process", "molecular_function", "cellular_component"];
    for o in 0..g.sz.go_terms {
        let term = resource(ds, "term", o);
        g.ty(&term, vocab(ds, "Term"));
        g.label(&term, format!("GO term {o}"));
        g.add(term.clone(), vocab(ds, "namespace"), Term::literal(spaces[o % 3]));
        if o > 2 {
            g.add(term.clone(), iri(RDFS_SUBCLASS), resource(ds, "term", o / 3));
        }
        g.add(term, vocab(ds, "definition"), Term::literal(format!("definition of GO term {o}")));
    }
}

fn hapmap(g: &mut Gen) {
    let ds = "hapmap";
    let populations = ["CEU", "YRI", "CHB", "JPT"];
    for k in 0..g.n * 2 {
        let snp = resource(ds, "snp", k);
        g.ty(&snp, vocab(ds, "SNP"));
        let gene = k % g.sz.genes;
        g.add(snp.clone(), vocab(ds, "gene"), resource("entrezgene", "gene", gene));
        g.add(snp.clone(), vocab(ds, "chromosome"), Term::literal(CHROMOSOMES[gene % CHROMOSOMES.len()]));
        g.add(snp, vocab(ds, "population"), Term::literal(populations[k % 4]));
    }
}

/// BioPAX-shaped interaction data; pathway datasets also get pathways.
fn biopax_dataset(g: &mut Gen, ds: &str, with_pathways: bool) {
    let sz = g.sz;
    let proteins = (sz.proteins / 2).max(2);
    let ids: Vec<usize> = (0..sz.proteins).collect();
    let chosen: Vec<usize> = ids.choose_multiple(&mut g.rng, proteins).copied().collect();
    for (local, &p) in chosen.iter().enumerate() {
        let prot = resource(ds, "protein", local);
        g.ty(&prot, biopax("protein"));
        g.add(prot.clone(), biopax("NAME"), Term::literal(format!("P{p}")));
        g.add(prot, biopax("XREF"), resource("uniprot", "protein", p));
    }
    let interactions = g.n / 2;
    for i in 0..interactions {
        let int = resource(ds, "interaction", i);
        g.ty(&int, biopax("physicalInteraction"));
        g.add(int.clone(), biopax("NAME"), Term::literal(format!("{ds} interaction {i}")));
        for _ in 0..2 {
            let p = g.pick(proteins);
            g.add(int.clone(), biopax("PARTICIPANTS"), resource(ds, "protein", p));
        }
    }
    if with_pathways {
        for w in 0..sz.pathways {
            let pw = resource(ds, "pathway", w);
            g.ty(&pw, biopax("pathway"));
            g.add(pw.clone(), biopax("NAME"), Term::literal(format!("{ds} pathway {w}")));
            for _ in 0..3 {
                let i = g.pick(interactions);
                g.add(pw.clone(), biopax("COMPONENTS"), resource(ds, "interaction", i));
            }
        }
    }
}

fn lhgdn(g: &mut Gen) {
    let ds = "lhgdn";
    let sz = g.sz;
    for i in 0..g.n {
        let assoc = resource(ds, "association", i);
        g.ty(&assoc, vocab(ds, "Association"));
        let (gene, article, term) = (g.pick(sz.genes), g.pick(sz.articles), g.pick(sz.diseases));
        g.add(assoc.clone(), vocab(ds, "gene"), resource("entrezgene", "gene", gene));
        g.add(assoc.clone(), vocab(ds, "article"), resource("pubmed", "article", article));
        g.add(assoc, vocab(ds, "disease"), resource("diseaseontology", "term", term));
    }
}

fn linkedct(g: &mut Gen) {
    let ds = "linkedct";
    let sz = g.sz;
    let conditions = (sz.trials / 2).max(2);
    let interventions = (sz.trials / 2).max(2);
    for t in 0..sz.trials {
        let trial = resource(ds, "trial", t);
        g.ty(&trial, vocab(ds, "trials"));
        g.add(trial.clone(), iri(DC_TITLE), Term::literal(format!("Trial {t}")));
        g.add(trial.clone(), vocab(ds, "phase"), Term::literal(format!("Phase {}", 1 + t % 4)));
        let c = g.pick(conditions);
        g.add(trial.clone(), vocab(ds, "condition"), resource(ds, "condition", c));
        let x = g.pick(interventions);
        g.add(trial, vocab(ds, "intervention"), resource(ds, "intervention", x));
    }
    for c in 0..conditions {
        let cond = resource(ds, "condition", c);
        g.add(cond.clone(), vocab(ds, "conditionName"), Term::literal(format!("condition {c}")));
        let s = g.pick(sz.diseases);
        g.add(cond, vocab(ds, "diseasomeRef"), resource("diseasome", "disease", s));
    }
    for x in 0..interventions {
        let int = resource(ds, "intervention", x);
        g.label(&int, format!("intervention {x}"));
        let d = g.pick(sz.drugs);
        g.add(int, vocab(ds, "drugbankRef"), resource("drugbank", "drug", d));
    }
}

fn phenotypeontology(g: &mut Gen) {
    let ds = "phenotypeontology";
    for t in 0..g.n {
        let term = resource(ds, "term", t);
        g.ty(&term, vocab(ds, "Term"));
        g.label(&term, format!("phenotype {t}"));
        if t > 0 {
            g.add(term.clone(), iri(RDFS_SUBCLASS), resource(ds, "term", t / 5));
        }
        g.add(term, vocab(ds, "definition"), Term::literal(format!("abnormal trait {t}")));
    }
}

fn sider(g: &mut Gen) {
    let ds = "sider";
    let sz = g.sz;
    for d in 0..sz.drugs / 2 {
        let drug = resource(ds, "drug", d);
        g.ty(&drug, vocab(ds, "drugs"));
        g.label(&drug, format!("sider drug {d}"));
        g.add(drug.clone(), iri(OWL_SAME_AS), resource("drugbank", "drug", d));
        for _ in 0..2 {
            let e = g.pick(sz.side_effects);
            g.add(drug.clone(), vocab(ds, "sideEffect"), resource(ds, "side_effect", e));
        }
    }
    for e in 0..sz.side_effects {
        let se = resource(ds, "side_effect", e);
        g.ty(&se, vocab(ds, "side_effects"));
        g.add(se, vocab(ds, "sideEffectName"), Term::literal(format!("effect {e}")));
    }
}

fn symptom(g: &mut Gen) {
    let ds = "symptom";
    let sz = g.sz;
    for y in 0..g.n {
        let sym = resource(ds, "symptom", y);
        g.ty(&sym, vocab(ds, "Symptom"));
        g.label(&sym, format!("symptom {y}"));
        for _ in 0..2 {
            let s = g.pick(sz.diseases);
            g.add(sym.clone(), vocab(ds, "ofDisease"), resource("diseasome", "disease", s));
        }
    }
}

fn generate_one(name: &str, g: &mut Gen) {
    match name {
        "drugbank" => drugbank(g),
        "uniprot" => uniprot(g),
        "pubmed" => pubmed(g),
        "entrezgene" => entrezgene(g),
        "kegg" => kegg(g),
        "chebi" => chebi(g),
        "dbpedia" => dbpedia(g),
        "dailymed" => dailymed(g),
        "diseasome" => diseasome(g),
        "genewiki" => genewiki(g),
        "diseaseontology" => diseaseontology(g),
        "umls" => umls(g),
        "mappings" => mappings(g),
        "geneontology" => geneontology(g),
        "hapmap" => hapmap(g),
        "biogrid" | "hprd" | "imid" | "intact" | "mint" => biopax_dataset(g, name, false),
        "cellmap" | "humancyc" | "ncinature" | "reactome" => biopax_dataset(g, name, true),
        "lhgdn" => lhgdn(g),
        "linkedct" => linkedct(g),
        "phenotypeontology" => phenotypeontology(g),
        "sider" => sider(g),
        "symptom" => symptom(g),
        other => unreachable!("unknown dataset {other}"),
    }
}

/// Generates every dataset. Output depends only on `seed` and `scale`.
pub fn generate_datasets(seed: u64, scale: usize) -> BTreeMap<&'static str, Vec<Triple>> {
    DATASETS
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let mut g = Gen {
                rng: ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64)),
                sz: Sizes::new(scale),
                n: scale.max(10),
                out: Vec::new(),
            };
            generate_one(name, &mut g);
            (name, g.out)
        })
        .collect()
}

/// Shape of a generated federation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub members: usize,
    pub scale: usize,
    /// Copy about a tenth of each member's triples into another member.
    pub overlapping: bool,
}

impl FixtureSpec {
    pub fn new(seed: u64, members: usize) -> Self {
        FixtureSpec { seed, members, scale: DEFAULT_SCALE, overlapping: false }
    }

    pub fn scale(mut self, scale: usize) -> Self {
        self.scale = scale;
        self
    }

    pub fn overlapping(mut self, overlapping: bool) -> Self {
        self.overlapping = overlapping;
        self
    }
}

/// Member id for position `i`: dataset names for a 29-member federation,
/// `member{i}` otherwise.
pub fn member_id(members: usize, i: usize) -> String {
    if members == DATASETS.len() {
        DATASETS[i].to_owned()
    } else {
        format!("member{i}")
    }
}

/// Distributes the datasets round-robin over `spec.members` stores.
pub fn generate_members(spec: &FixtureSpec) -> Vec<(String, Store)> {
    assert!(spec.members >= 1, "at least one member");
    let datasets = generate_datasets(spec.seed, spec.scale);
    let mut stores: Vec<Store> = (0..spec.members).map(|_| Store::new()).collect();
    for (i, name) in DATASETS.iter().enumerate() {
        stores[i % spec.members].extend(datasets[name].iter().cloned());
    }
    if spec.overlapping && spec.members > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
        let copies: Vec<(usize, Triple)> = stores
            .iter()
            .enumerate()
            .flat_map(|(m, s)| s.iter().map(move |t| (m, t)))
            .filter(|_| rng.random_bool(0.1))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(17));
        for (m, t) in copies {
            let other = (m + 1 + rng.random_range(0..spec.members - 1)) % spec.members;
            stores[other].insert(t);
        }
    }
    stores.into_iter().enumerate().map(|(i, s)| (member_id(spec.members, i), s)).collect()
}

/// Written next to generated fixtures: what was generated and the
/// centralized answer size of every corpus query.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FixtureManifest {
    pub seed: u64,
    pub scale: usize,
    pub overlapping: bool,
    /// Triples per member id.
    pub triples: BTreeMap<String, usize>,
    /// Result rows per corpus query, from evaluation over the merged store.
    pub cardinalities: BTreeMap<String, usize>,
}

impl FixtureManifest {
    pub fn load(path: &Path) -> Result<Self, FixtureError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| FixtureError::Io { path: path.to_owned(), source })?;
        toml::from_str(&text).map_err(|e| FixtureError::Manifest(e.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest: {0}")]
    Manifest(String),
}

/// Centralized cardinality of each query over the union of `members`.
pub fn expected_cardinalities(members: &[(String, Store)], corpus: &[CorpusQuery]) -> BTreeMap<String, usize> {
    let merged = merge_stores(members.iter().map(|(_, s)| s));
    corpus
        .iter()
        .map(|q| {
            let parsed = q.parse().unwrap_or_else(|e| panic!("corpus query {} does not parse: {e}", q.name));
            (q.name.clone(), evaluate(&parsed, &merged).cardinality())
        })
        .collect()
}

/// Generates a federation and writes it under `out`:
///
/// - `data/<id>.nt` per member
/// - `federation.toml` (in-process members over the data files)
/// - `service.toml` (one binding `/<id>/sparql` per member on port 8890)
/// - `bench.toml` (local and hybrid scenarios over the corpus)
/// - `corpus/*.rq`
/// - `manifest.toml`
pub fn write_fixtures(spec: &FixtureSpec, out: &Path) -> Result<FixtureManifest, FixtureError> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| FixtureError::Io { path, source }
    };
    let data_dir = out.join("data");
    std::fs::create_dir_all(&data_dir).map_err(io(&data_dir))?;
    let members = generate_members(spec);

    let mut federation = FederationConfig::default();
    let mut service = ServiceConfig {
        port: 8890,
        host: "127.0.0.1".into(),
        max_concurrent: crate::service::DEFAULT_MAX_CONCURRENT,
        bindings: Vec::new(),
    };
    for (id, store) in &members {
        let rel = PathBuf::from("data").join(format!("{id}.nt"));
        let path = out.join(&rel);
        let file = std::fs::File::create(&path).map_err(io(&path))?;
        let mut w = std::io::BufWriter::new(file);
        let triples: Vec<Triple> = store.iter().collect();
        write_ntriples(&mut w, triples.iter()).map_err(io(&path))?;
        w.flush().map_err(io(&path))?;
        federation.members.push(MemberConfig { id: id.clone(), data: vec![rel.clone()], ..Default::default() });
        service.bindings.push(BindingConfig {
            path: format!("/{id}/sparql"),
            data: vec![rel],
            latency_ms: 0,
            jitter_ms: 0,
        });
    }

    let corpus = builtin_corpus();
    let corpus_dir = out.join("corpus");
    write_corpus(&corpus_dir, &corpus).map_err(io(&corpus_dir))?;

    let mut bench = BenchConfig::new("federation.toml", vec![PathBuf::from("corpus")]);
    bench.scenarios = vec![Scenario::Local, Scenario::Hybrid];
    bench.hybrid = default_hybrid().into_iter().filter(|(id, _)| members.iter().any(|(m, _)| m == id)).collect();
    bench.output = OutputPaths {
        json: Some("report.json".into()),
        csv: Some("report.csv".into()),
        markdown: Some("report.md".into()),
    };

    let manifest = FixtureManifest {
        seed: spec.seed,
        scale: spec.scale,
        overlapping: spec.overlapping,
        triples: members.iter().map(|(id, s)| (id.clone(), s.len())).collect(),
        cardinalities: expected_cardinalities(&members, &corpus),
    };
    let files = [
        ("federation.toml", federation.to_toml()),
        ("service.toml", service.to_toml()),
        ("bench.toml", bench.to_toml()),
        ("manifest.toml", toml::to_string(&manifest).expect("manifest serializes")),
    ];
    for (name, text) in files {
        let path = out.join(name);
        std::fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_datasets(3, 20);
        let b = generate_datasets(3, 20);
        let c = generate_datasets(4, 20);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 29);
        assert!(a.values().all(|t| !t.is_empty()));
    }

    #[test]
    fn members_partition_or_overlap() {
        let total: usize =
            generate_datasets(1, 20).values().map(|t| t.iter().collect::<std::collections::HashSet<_>>().len()).sum();
        let disjoint = generate_members(&FixtureSpec::new(1, 5).scale(20));
        assert_eq!(disjoint.iter().map(|(_, s)| s.len()).sum::<usize>(), total);
        let ids: Vec<_> = disjoint.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["member0", "member1", "member2", "member3", "member4"]);
        let overlapping = generate_members(&FixtureSpec::new(1, 5).scale(20).overlapping(true));
        assert!(overlapping.iter().map(|(_, s)| s.len()).sum::<usize>() > total);
        let named = generate_members(&FixtureSpec::new(1, 29).scale(10));
        assert_eq!(named[6].0, "drugbank");
    }
}
