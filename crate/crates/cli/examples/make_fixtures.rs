//! Regenerates the bundled fixtures under `crates/cli/fixtures/`.
//!
//!     cargo run -p evalarena-cli --example make_fixtures

use std::path::Path;

use chrono::{TimeZone, Utc};
use evalarena::corpus::{save_finetune, FinetunePair, InstructionRecord, ResponseSet};
use evalarena::rating::{write_votes, Outcome, Vote};
use evalarena::simulate::BradleyTerry;
use evalarena::EvalDataset;

const MODELS: [&str; 3] = ["model-alpha", "model-beta", "model-gamma"];

fn rec(id: &str, category: Option<&str>, instruction: &str, reference: &str) -> InstructionRecord {
    InstructionRecord {
        id: id.into(),
        category: category.map(Into::into),
        instruction: instruction.into(),
        reference_answer: Some(reference.into()),
    }
}

fn voting_set() -> Vec<InstructionRecord> {
    let story = Some("Hikaye Oluşturma");
    let math = Some("Basit Matematik");
    let sim = Some("Benzerlik Bulma");
    vec![
        rec("v01", story, "Engelli bir genç profesyonel bir atlet olmak ister. Çektiği zorlukları anlat.",
            "Genç atlet her sabah erkenden antrenmana çıktı, önyargılarla mücadele etti ve sonunda ulusal yarışta madalya kazandı."),
        rec("v02", story, "Bir kahve dükkanında geçen romantik bir hikaye yaz.",
            "Yağmurlu bir akşam kahve dükkanında aynı kitabı okuyan iki yabancı tanıştı ve her hafta orada buluşmaya başladılar."),
        rec("v03", story, "Kaybolan bir kedinin eve dönüş yolculuğunu anlat.",
            "Kedi şehrin kalabalık sokaklarında günlerce yürüdü, bir çocuğun yardımıyla yolunu buldu ve sonunda evine döndü."),
        rec("v04", math, "100 gramı 5 TL olan fındığın kilosu kaç TL'dir?",
            "Bir kilo 1000 gramdır, bu yüzden fındığın kilosu 50 TL'dir."),
        rec("v05", math, "Bir sınıfta 12 kız ve 18 erkek öğrenci var. Toplam kaç öğrenci vardır?",
            "Sınıfta toplam 30 öğrenci vardır."),
        rec("v06", math, "Saatte 60 km hızla giden bir araç 3 saatte kaç km yol alır?",
            "Araç 3 saatte 180 km yol alır."),
        rec("v07", math, "24 elmayı 4 kişiye eşit paylaştırırsak kişi başı kaç elma düşer?",
            "Kişi başı 6 elma düşer."),
        rec("v08", sim, "Aşağıdaki listede çorap, hangilerine uymamaktadır? Bisiklet, Gömlek, Tren, Kitap, Uçak.",
            "Çorap bir giysidir; bu yüzden Bisiklet, Tren, Kitap ve Uçak ile uyuşmaz, yalnızca Gömlek ile benzerdir."),
        rec("v09", sim, "Elma, armut ve havuç arasında hangisi farklıdır?",
            "Havuç bir sebzedir, elma ve armut ise meyvedir; bu yüzden havuç farklıdır."),
        rec("v10", sim, "Kalem ve silgi arasındaki benzerlik nedir?",
            "Kalem ve silgi yazı yazarken kullanılan kırtasiye malzemeleridir."),
    ]
}

fn general_set() -> Vec<InstructionRecord> {
    vec![
        rec("g01", None, "Türkiye’nin başkenti neresidir?", "Türkiye’nin başkenti Ankara’dır."),
        rec("g02", None, "Aristotales ve Platon arasındaki ilişki nedir?", "Aristotales Platon’un öğrencisidir."),
        rec("g03", None, "Yapay zeka işsizlik riski yaratıyor mu?",
            "Evet, yapay zeka teknolojileri tekrar eden işleri yapan çalışanları işsiz bırakabilir."),
        rec("g04", None, "Suyun kaynama noktası kaç derecedir?", "Deniz seviyesinde suyun kaynama noktası 100 derecedir."),
        rec("g05", None, "İstanbul hangi iki kıtada yer alır?", "İstanbul Avrupa ve Asya kıtalarında yer alır."),
        rec("g06", None, "Fotosentez nedir?", "Fotosentez bitkilerin güneş ışığını kullanarak besin üretmesidir."),
        rec("g07", None, "Dünyanın en uzun nehri hangisidir?", "Dünyanın en uzun nehri Nil nehridir."),
        rec("g08", None, "Bir yılda kaç ay vardır?", "Bir yılda on iki ay vardır."),
        rec("g09", None, "Güneş sistemindeki en büyük gezegen hangisidir?", "Güneş sistemindeki en büyük gezegen Jüpiter’dir."),
        rec("g10", None, "Kitap okumanın faydaları nelerdir?",
            "Kitap okumak kelime dağarcığını geliştirir, hayal gücünü artırır ve bilgi kazandırır."),
    ]
}

/// Alpha echoes the reference, beta keeps its first half, gamma answers
/// generically and skips every third record.
fn respond(model: &str, idx: usize, record: &InstructionRecord) -> Option<String> {
    let reference = record.reference_answer.as_deref().unwrap();
    let words: Vec<&str> = reference.split_whitespace().collect();
    match model {
        "model-alpha" => Some(if idx % 4 == 3 {
            format!("Elbette. {reference}")
        } else {
            reference.to_string()
        }),
        "model-beta" => Some(words[..words.len().div_ceil(2)].join(" ")),
        "model-gamma" => (idx % 3 != 2).then(|| {
            format!(
                "Bu soru hakkında kesin bir şey söylemek zor, ancak {} olabilir.",
                words[words.len() - 1]
            )
        }),
        _ => unreachable!(),
    }
}

fn write_responses(dir: &Path, ds: &EvalDataset) {
    std::fs::create_dir_all(dir).unwrap();
    for model in MODELS {
        let set = ResponseSet {
            model_name: model.into(),
            dataset_name: ds.name().into(),
            responses: ds
                .records()
                .iter()
                .enumerate()
                .filter_map(|(i, r)| respond(model, i, r).map(|t| (r.id.clone(), t)))
                .collect(),
        };
        set.save(&dir.join(format!("{model}.jsonl")), ds).unwrap();
    }
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&root).unwrap();

    let v = EvalDataset::new("v", voting_set()).unwrap();
    let g = EvalDataset::new("g", general_set()).unwrap();
    v.save(&root.join("v.jsonl")).unwrap();
    g.save(&root.join("g.jsonl")).unwrap();
    write_responses(&root.join("responses/v"), &v);
    write_responses(&root.join("responses/g"), &g);

    let bt = BradleyTerry::new([(MODELS[0], 3.0), (MODELS[1], 1.5), (MODELS[2], 0.6)])
        .with_draws(0.1, 0.05);
    let record_ids: Vec<String> = v.records().iter().map(|r| r.id.clone()).collect();
    let judges: Vec<String> = (1..=8).map(|i| format!("judge-{i}")).collect();
    write_votes(
        &root.join("votes.log"),
        &bt.simulate(300, &record_ids, &judges, 2024),
    )
    .unwrap();

    let one = Vote {
        vote_id: "vote-0001".into(),
        record_id: "v04".into(),
        model_a: "model-alpha".into(),
        model_b: "model-beta".into(),
        outcome: Outcome::AWins,
        judge_id: "judge-1".into(),
        timestamp: Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap(),
    };
    write_votes(&root.join("one_vote.log"), &[one]).unwrap();

    let pair = |id: &str, ins: &str, resp: &str, score: f64| FinetunePair {
        id: id.into(),
        instruction: ins.into(),
        response: resp.into(),
        source: "M".into(),
        quality_score: Some(score),
    };
    save_finetune(
        &root.join("pairs.jsonl"),
        &[
            pair("m1", "Bir şiir yaz.", "şiir", 0.3),
            pair(
                "m2",
                "Türkiye’nin başkenti neresidir?",
                "Türkiye’nin başkenti Ankara’dır.",
                0.7,
            ),
        ],
    )
    .unwrap();
    println!("fixtures written to {}", root.display());
}
