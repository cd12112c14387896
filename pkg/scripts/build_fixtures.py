#!/usr/bin/env python3
"""Regenerate everything under fixtures/ from the hand-authored data below.

The fixture world is 20 systematic-review-style topics over a 50-document
corpus with a small MeSH forest, reduced UMLS tables, a description corpus,
qrels for the three evaluation topics, and replay files for the two remote
mapper clients. Expected query ASTs are declared here by hand, never
produced by the parser, so they can serve as an independent reference.

Topics are built from themes: a theme bundles one fragment's atoms with the
mapper behavior recorded for it. The 20 topics carry 53 fragments in total,
a mean of 2.65 fragments per query.

Run from the repository root: python3 scripts/build_fixtures.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


# ---------------------------------------------------------------------------
# Hand AST constructors (JSON interchange form)


def atom(text, field="title_abstract", truncated=False):
    return {"type": "atom", "text": text, "field": field, "truncated": truncated}


def mesh(text):
    return atom(text, field="mesh")


def mesh_noexp(text):
    return atom(text, field="mesh_noexp")


def trunc(text, field="title_abstract"):
    return atom(text, field=field, truncated=True)


def op(name, *children):
    return {"type": "op", "op": name, "children": list(children)}


# ---------------------------------------------------------------------------
# MeSH forest: heading -> tree numbers (every dotted prefix present)

MESH_TREE = [
    ("Anatomy", "A01"),
    ("Body Regions", "A01.111"),
    ("Head", "A01.111.456"),
    ("Eye", "A01.111.456.505"),
    ("Digestive System", "A03"),
    ("Biliary Tract", "A03.159"),
    ("Liver", "A03.620"),
    ("Cardiovascular System", "A07"),
    ("Arteries", "A07.231"),
    ("Hepatic Artery", "A07.231.390"),
    ("Neoplasms", "C04"),
    ("Neoplasms by Site", "C04.588"),
    ("Liver Neoplasms", "C04.588.274"),
    ("Carcinoma, Hepatocellular", "C04.588.274.623"),
    ("Digestive System Diseases", "C06"),
    ("Liver Diseases", "C06.552"),
    ("Fatty Liver", "C06.552.241"),
    ("Fatty Liver, Alcoholic", "C06.552.241.519"),
    ("Fibrosis", "C06.552.380"),
    ("Liver Cirrhosis", "C06.552.380.610"),
    ("Congenital Hepatic Fibrosis", "C06.552.380.610.150"),
    ("Cardiovascular Diseases", "C14"),
    ("Vascular Diseases", "C14.907"),
    ("Hypertension", "C14.907.489"),
    ("Hypertension, Portal", "C14.907.489.480"),
    ("Stroke", "C14.907.725"),
    ("Congenital, Hereditary, and Neonatal Diseases and Abnormalities", "C16"),
    ("Genetic Diseases, Inborn", "C16.320"),
    ("Nutritional and Metabolic Diseases", "C18"),
    ("Metabolic Diseases", "C18.452"),
    ("Diabetes Mellitus", "C18.452.394"),
    ("Diabetes Mellitus, Type 2", "C18.452.394.750"),
    ("Obesity", "C18.452.726"),
    ("Obesity, Morbid", "C18.452.726.500"),
    ("Pathological Conditions, Signs and Symptoms", "C23"),
    ("Pathologic Processes", "C23.550"),
    ("Fibrosis", "C23.550.355"),
    ("Retroperitoneal Fibrosis", "C23.550.355.500"),
    ("Organic Chemicals", "D02"),
    ("Acids, Carbocyclic", "D02.455"),
    ("Aspirin", "D02.455.426"),
    ("Diagnosis", "E01"),
    ("Diagnostic Techniques and Procedures", "E01.370"),
    ("Biopsy", "E01.370.225"),
    ("Biopsy, Needle", "E01.370.225.098"),
    ("Image-Guided Biopsy", "E01.370.225.500"),
    ("Diagnostic Imaging", "E01.370.350"),
    ("Elasticity Imaging Techniques", "E01.370.350.250"),
    ("Magnetic Resonance Imaging", "E01.370.350.500"),
    ("Ultrasonography", "E01.370.350.850"),
    ("Ultrasonography, Doppler", "E01.370.350.850.500"),
    ("Mass Screening", "E01.370.500"),
    ("Investigative Techniques", "E05"),
    ("Epidemiologic Methods", "E05.318"),
    ("Surveys and Questionnaires", "E05.318.308"),
    ("Body Mass Index", "E05.318.802"),
    ("Behavior", "F01"),
    ("Behavioral Symptoms", "F01.145"),
    ("Depression", "F01.145.126"),
    ("Smoking", "F01.145.466"),
    ("Smoking Cessation", "F01.145.466.500"),
    ("Musculoskeletal Physiological Phenomena", "G11"),
    ("Movement", "G11.427"),
    ("Exercise", "G11.427.410"),
    ("Persons", "M01"),
    ("Transients and Migrants", "M01.900"),
]


# ---------------------------------------------------------------------------
# UMLS-style tables (CUI | SAB | STR); one MSH row per concept = the heading

CONSO = [
    ("C0001", "MSH", "Liver"),
    ("C0001", "SNOMEDCT_US", "hepatic"),
    ("C0002", "MSH", "Hepatic Artery"),
    ("C0003", "MSH", "Fibrosis"),
    ("C0003", "SNOMEDCT_US", "fibrotic scarring"),
    ("C0004", "MSH", "Liver Cirrhosis"),
    ("C0004", "SNOMEDCT_US", "cirrhosis"),
    ("C0005", "MSH", "Genetic Diseases, Inborn"),
    ("C0005", "SNOMEDCT_US", "fibrosis, congenital"),
    ("C0006", "MSH", "Biopsy"),
    ("C0006", "SNOMEDCT_US", "biopsy procedure"),
    ("C0007", "MSH", "Biopsy, Needle"),
    ("C0007", "SNOMEDCT_US", "needle biopsy"),
    ("C0008", "MSH", "Elasticity Imaging Techniques"),
    ("C0008", "SNOMEDCT_US", "elastography"),
    ("C0009", "MSH", "Fatty Liver"),
    ("C0009", "SNOMEDCT_US", "steatosis"),
    ("C0010", "MSH", "Obesity"),
    ("C0010", "SNOMEDCT_US", "obese"),
    ("C0010", "SNOMEDCT_US", "increased body mass index"),
    ("C0011", "MSH", "Body Mass Index"),
    ("C0011", "SNOMEDCT_US", "body mass index"),
    ("C0012", "MSH", "Carcinoma, Hepatocellular"),
    ("C0012", "SNOMEDCT_US", "hepatocellular carcinoma"),
    ("C0012", "SNOMEDCT_US", "hcc"),
    ("C0013", "MSH", "Ultrasonography"),
    ("C0013", "SNOMEDCT_US", "ultrasound"),
    ("C0013", "SNOMEDCT_US", "sonography"),
    ("C0014", "MSH", "Diabetes Mellitus, Type 2"),
    ("C0014", "SNOMEDCT_US", "type 2 diabetes"),
    ("C0014", "SNOMEDCT_US", "t2dm"),
    ("C0015", "MSH", "Diabetes Mellitus"),
    ("C0015", "SNOMEDCT_US", "diabetes"),
    ("C0016", "MSH", "Hypertension"),
    ("C0016", "SNOMEDCT_US", "high blood pressure"),
    ("C0017", "MSH", "Hypertension, Portal"),
    ("C0017", "SNOMEDCT_US", "portal hypertension"),
    ("C0018", "MSH", "Aspirin"),
    ("C0018", "SNOMEDCT_US", "acetylsalicylic acid"),
    ("C0019", "MSH", "Stroke"),
    ("C0019", "SNOMEDCT_US", "cerebrovascular accident"),
    ("C0019", "SNOMEDCT_US", "brain attack"),
    ("C0020", "MSH", "Magnetic Resonance Imaging"),
    ("C0020", "SNOMEDCT_US", "mri"),
    ("C0020", "SNOMEDCT_US", "magnetic resonance"),
    ("C0021", "MSH", "Exercise"),
    ("C0021", "SNOMEDCT_US", "physical activity"),
    ("C0022", "MSH", "Depression"),
    ("C0022", "SNOMEDCT_US", "low mood"),
    ("C0022", "SNOMEDCT_US", "depressed mood"),
    ("C0023", "MSH", "Smoking Cessation"),
    ("C0023", "SNOMEDCT_US", "quit smoking"),
    ("C0023", "SNOMEDCT_US", "stop smoking"),
    ("C0024", "MSH", "Smoking"),
    ("C0024", "SNOMEDCT_US", "tobacco smoking"),
    ("C0025", "MSH", "Surveys and Questionnaires"),
    ("C0025", "SNOMEDCT_US", "survey"),
    ("C0025", "SNOMEDCT_US", "questionnaire"),
    ("C0026", "MSH", "Mass Screening"),
    ("C0026", "SNOMEDCT_US", "screening"),
    ("C0026", "SNOMEDCT_US", "early detection"),
    ("C0027", "MSH", "Liver Neoplasms"),
    ("C0027", "SNOMEDCT_US", "liver cancer"),
    ("C0027", "SNOMEDCT_US", "hepatic tumor"),
    ("C0028", "MSH", "Transients and Migrants"),
    ("C0028", "SNOMEDCT_US", "migrants"),
    ("C0029", "MSH", "Eye"),
    ("C0029", "SNOMEDCT_US", "ocular"),
    ("C0030", "MSH", "Head"),
    ("C0031", "MSH", "Neoplasms"),
    ("C0031", "SNOMEDCT_US", "tumor"),
]

DEFS = [
    ("C0001", "Large organ of metabolism and detoxification in the upper abdomen."),
    ("C0004", "End stage scarring of the liver with architectural distortion."),
    ("C0008", "Imaging of tissue stiffness, typically with ultrasound shear waves."),
    ("C0009", "Accumulation of fat within hepatocytes."),
    ("C0010", "Excess body fat with increased health risk."),
    ("C0012", "Primary malignant epithelial tumour of the liver."),
    ("C0016", "Persistently raised arterial blood pressure."),
    ("C0019", "Acute loss of brain function from vascular causes."),
    ("C0022", "Mood disorder with persistent sadness and loss of interest."),
    ("C0026", "Testing of asymptomatic populations to detect disease early."),
]

STYS = [
    ("C0001", "Body Part, Organ, or Organ Component"),
    ("C0002", "Body Part, Organ, or Organ Component"),
    ("C0003", "Pathologic Function"),
    ("C0004", "Disease or Syndrome"),
    ("C0005", "Disease or Syndrome"),
    ("C0006", "Diagnostic Procedure"),
    ("C0007", "Diagnostic Procedure"),
    ("C0008", "Diagnostic Procedure"),
    ("C0009", "Disease or Syndrome"),
    ("C0010", "Disease or Syndrome"),
    ("C0011", "Clinical Attribute"),
    ("C0012", "Neoplastic Process"),
    ("C0013", "Diagnostic Procedure"),
    ("C0014", "Disease or Syndrome"),
    ("C0015", "Disease or Syndrome"),
    ("C0016", "Disease or Syndrome"),
    ("C0017", "Disease or Syndrome"),
    ("C0018", "Pharmacologic Substance"),
    ("C0019", "Disease or Syndrome"),
    ("C0020", "Diagnostic Procedure"),
    ("C0021", "Daily or Recreational Activity"),
    ("C0022", "Mental or Behavioral Dysfunction"),
    ("C0023", "Individual Behavior"),
    ("C0024", "Individual Behavior"),
    ("C0025", "Research Activity"),
    ("C0026", "Health Care Activity"),
    ("C0027", "Neoplastic Process"),
    ("C0028", "Population Group"),
    ("C0029", "Body Part, Organ, or Organ Component"),
    ("C0030", "Body Location or Region"),
    ("C0031", "Neoplastic Process"),
]

RELS = [
    ("C0004", "PAR", "C0003"),
    ("C0012", "PAR", "C0027"),
    ("C0014", "PAR", "C0015"),
    ("C0017", "PAR", "C0016"),
    ("C0023", "PAR", "C0024"),
    ("C0007", "PAR", "C0006"),
    ("C0027", "PAR", "C0031"),
    ("C0029", "PAR", "C0030"),
]


# ---------------------------------------------------------------------------
# Candidate descriptions (the entity description corpus)

DESCRIPTIONS = {
    "Elasticity Imaging Techniques": (
        "Elasticity imaging techniques such as transient elastography and the "
        "fibroscan device measure tissue stiffness with ultrasound shear waves, "
        "most often to stage liver fibrosis without a biopsy."
    ),
    "Transients and Migrants": (
        "People who move from place to place, including seasonal workers and "
        "nomadic populations, studied in social and occupational health research."
    ),
    "Liver": (
        "The liver is a large hepatic organ responsible for metabolism, bile "
        "production, and detoxification of the blood."
    ),
    "Hepatic Artery": (
        "The hepatic artery supplies oxygenated blood to the liver, gallbladder, "
        "and bile ducts, branching from the common hepatic trunk."
    ),
    "Fibrosis": (
        "Fibrosis is the formation of excess fibrous connective tissue in an "
        "organ, a scarring process that can affect the liver, lungs, and kidneys."
    ),
    "Liver Cirrhosis": (
        "Liver cirrhosis is end stage scarring of the liver in which chronic "
        "hepatic fibrosis and regenerative nodules distort the architecture of "
        "the liver, commonly after viral hepatitis or alcohol related cirrhosis."
    ),
    "Genetic Diseases, Inborn": (
        "Conditions caused by abnormalities in genes or chromosomes present from "
        "birth, spanning metabolic, structural, and developmental disorders."
    ),
    "Congenital Hepatic Fibrosis": (
        "An inherited ductal plate malformation with periportal scarring and "
        "portal hypertension presenting in childhood."
    ),
    "Biopsy": (
        "A biopsy is the removal of tissue for diagnosis; a liver biopsy samples "
        "hepatic tissue with a needle for histological grading."
    ),
    "Biopsy, Needle": (
        "Needle biopsy removes a small core of tissue through a hollow needle, "
        "as in percutaneous liver biopsy performed to stage chronic liver disease."
    ),
    "Image-Guided Biopsy": (
        "Biopsy performed under imaging guidance such as ultrasound or computed "
        "tomography to target a lesion precisely."
    ),
    "Fatty Liver": (
        "Fatty liver, or hepatic steatosis, is the accumulation of fat within "
        "liver cells, strongly associated with obesity and metabolic syndrome."
    ),
    "Obesity": (
        "Obesity is excess body fat commonly assessed with the body mass index, "
        "raising the risk of diabetes, hypertension, and fatty liver."
    ),
    "Body Mass Index": (
        "The body mass index relates weight to height squared and screens for "
        "underweight, overweight, and obesity in adults."
    ),
    "Carcinoma, Hepatocellular": (
        "Hepatocellular carcinoma is the most common primary liver cancer, "
        "arising in cirrhotic livers and screened for with ultrasound; hcc "
        "surveillance targets patients with chronic liver disease."
    ),
    "Ultrasonography": (
        "Ultrasonography uses high frequency sound to image organs in real time; "
        "ultrasound examinations are routine in abdominal and obstetric care."
    ),
    "Ultrasonography, Doppler": (
        "Doppler ultrasound measures blood flow velocity and direction within "
        "vessels using frequency shifts of the reflected sound."
    ),
    "Diabetes Mellitus, Type 2": (
        "Type 2 diabetes mellitus is a metabolic disorder of insulin resistance "
        "and relative insulin deficiency, often linked to obesity; t2dm is "
        "managed with lifestyle change and oral agents."
    ),
    "Diabetes Mellitus": (
        "Diabetes mellitus is a group of metabolic diseases marked by chronic "
        "hyperglycemia from defects in insulin secretion or action."
    ),
    "Hypertension": (
        "Hypertension is persistently high blood pressure in the systemic "
        "arteries, a major modifiable risk factor for stroke and heart disease."
    ),
    "Hypertension, Portal": (
        "Portal hypertension is elevated pressure in the portal venous system, "
        "usually from liver cirrhosis, causing varices and ascites."
    ),
    "Aspirin": (
        "Aspirin, or acetylsalicylic acid, inhibits platelet aggregation and is "
        "used for pain relief and prevention of cardiovascular events."
    ),
    "Stroke": (
        "A stroke or cerebrovascular accident occurs when blood flow to part of "
        "the brain stops, causing lasting neurological deficits."
    ),
    "Magnetic Resonance Imaging": (
        "Magnetic resonance imaging, or mri, maps soft tissue with strong "
        "magnetic fields and radio waves without ionizing radiation."
    ),
    "Exercise": (
        "Exercise is planned physical activity performed to maintain or improve "
        "fitness, from walking programmes to structured resistance training."
    ),
    "Depression": (
        "Depression is a mood disorder of persistent sadness and low mood with "
        "loss of interest, affecting sleep, appetite, and concentration."
    ),
    "Smoking Cessation": (
        "Smoking cessation is the process of quitting tobacco; counselling and "
        "medication help people quit smoking for good."
    ),
    "Smoking": (
        "Smoking is the inhalation of burning tobacco, the leading preventable "
        "cause of cancer and cardiovascular disease."
    ),
    "Surveys and Questionnaires": (
        "Surveys and questionnaires collect self reported data through "
        "structured questions; a well designed survey or questionnaire supports "
        "research and audit."
    ),
    "Mass Screening": (
        "Mass screening tests large populations for early detection of disease, "
        "as in cancer screening programmes."
    ),
    "Liver Neoplasms": (
        "Liver neoplasms include primary liver cancer such as hepatocellular "
        "carcinoma and metastatic hepatic tumor deposits."
    ),
    "Neoplasms": (
        "Neoplasms are abnormal tissue growths, benign or malignant, arising "
        "from uncontrolled cell division."
    ),
    "Eye": (
        "The eye is the ocular organ of vision, focusing light onto the retina "
        "to form images."
    ),
    "Head": (
        "The head is the upper part of the body containing the brain, eyes, "
        "ears, nose, and mouth."
    ),
    "Persons": (
        "Persons are individual human beings considered in demographic, legal, "
        "and social research contexts."
    ),
}


# ---------------------------------------------------------------------------
# Themes: one fragment's atoms plus the recorded mapper behavior.
# "atm_whole" is the response to the serialized MeSH-stripped fragment;
# None means no MeSH-category mapping, cascading to clauses, then terms.
# Each mapping is (heading, category) for ATM and (heading, score) for
# MetaMap, which records MSH-source entities (non-MSH noise uses source=SNOMED).

THEMES = {
    "eit": {
        "atoms": [
            mesh("Elasticity Imaging Techniques"),
            trunc("transient elastograph"),
            atom("fibroscan"),
        ],
        "atm_whole": [
            ("Transients and Migrants", "MeSH"),
            ("Elasticity Imaging Techniques", "MeSH"),
        ],
        "metamap": {
            "transient elastograph": [("elastography", 900, "SNOMEDCT_US")],
            "fibroscan": [],
        },
    },
    "livercirr": {
        "node": op(
            "OR",
            mesh("Liver Cirrhosis"),
            op("AND",
               op("OR", atom("hepatic"), atom("liver")),
               op("OR", atom("fibrosis"), atom("cirrhosis"))),
        ),
        "atm_whole": [("Journal of Hepatology", "Journal")],
        "atm_clauses": {
            "hepatic": [],
            "liver": [("Liver", "MeSH")],
            "fibrosis": [("Fibrosis", "MeSH")],
            "cirrhosis": [("Liver Cirrhosis", "MeSH")],
        },
        "metamap": {
            "hepatic": [("Liver", 812, "MSH")],
            "liver": [("Liver", 1000, "MSH")],
            "fibrosis": [("Fibrosis", 1000, "MSH")],
            "cirrhosis": [("Liver Cirrhosis", 943, "MSH")],
        },
    },
    "biopsy_needle": {
        "atoms": [trunc("liver biops"), mesh("Biopsy, Needle")],
        "atm_whole": [],
        "atm_clauses": {'"liver biops*"': []},
        "atm_terms": {
            "liver": [("Liver", "MeSH")],
            "biops*": [("Biopsy", "MeSH")],
        },
        "metamap": {
            "liver biops": [("Liver", 861, "MSH"), ("Biopsy", 827, "MSH")],
        },
    },
    "fattyliver": {
        "atoms": [mesh_noexp("Fatty Liver"), atom("fatty liver"), atom("steatosis")],
        "atm_whole": [("Fatty Liver", "MeSH")],
        "metamap": {
            "fatty liver": [("Fatty Liver", 1000, "MSH")],
            "steatosis": [("Fatty Liver", 890, "MSH")],
        },
    },
    "obesity": {
        "atoms": [mesh("Obesity"), trunc("obes"), atom("body mass index")],
        "atm_whole": [("Obesity", "MeSH"), ("Body Mass Index", "MeSH")],
        "metamap": {
            "obes": [("Obesity", 966, "MSH")],
            "body mass index": [("Body Mass Index", 1000, "MSH"), ("Obesity", 710, "MSH")],
        },
    },
    "hcc": {
        "atoms": [mesh("Carcinoma, Hepatocellular"), atom("hepatocellular carcinoma"), atom("hcc")],
        "atm_whole": [("Carcinoma, Hepatocellular", "MeSH")],
        "metamap": {
            "hepatocellular carcinoma": [
                ("Carcinoma, Hepatocellular", 1000, "MSH"),
                ("Liver Neoplasms", 780, "MSH"),
            ],
            "hcc": [("Carcinoma, Hepatocellular", 912, "MSH")],
        },
    },
    "ultrasound": {
        "atoms": [mesh("Ultrasonography"), atom("ultrasound"), trunc("sonograph")],
        "atm_whole": [("Ultrasonography", "MeSH")],
        "metamap": {
            "ultrasound": [("Ultrasonography", 1000, "MSH")],
            "sonograph": [("Ultrasonography", 855, "MSH")],
        },
    },
    "screen_not": {
        "node": op("NOT", atom("screening"), atom("autopsy")),
        "atm_whole": [],
        "atm_clauses": {
            "screening": [("Mass Screening", "MeSH")],
            "autopsy": [],
        },
        "metamap": {
            "screening": [("Mass Screening", 740, "MSH")],
            "autopsy": [("autopsy finding", 650, "SNOMEDCT_US")],
        },
    },
    "diabetes2": {
        "atoms": [mesh("Diabetes Mellitus, Type 2"), atom("type 2 diabetes"), atom("t2dm")],
        "atm_whole": [("Diabetes Mellitus, Type 2", "MeSH"), ("Diabetes Mellitus", "MeSH")],
        "metamap": {
            "type 2 diabetes": [
                ("Diabetes Mellitus, Type 2", 1000, "MSH"),
                ("Diabetes Mellitus", 820, "MSH"),
            ],
            "t2dm": [("Diabetes Mellitus, Type 2", 905, "MSH")],
        },
    },
    "htn": {
        "atoms": [mesh("Hypertension"), atom("high blood pressure"), trunc("hypertens")],
        "atm_whole": [("Hypertension", "MeSH")],
        "metamap": {
            "high blood pressure": [("Hypertension", 1000, "MSH")],
            "hypertens": [("Hypertension", 930, "MSH"), ("Hypertension, Portal", 540, "MSH")],
        },
    },
    "aspirin": {
        "atoms": [mesh("Aspirin"), atom("aspirin"), atom("acetylsalicylic acid")],
        "atm_whole": [("Aspirin", "MeSH")],
        "metamap": {
            "aspirin": [("Aspirin", 1000, "MSH")],
            "acetylsalicylic acid": [("Aspirin", 961, "MSH")],
        },
    },
    "stroke": {
        "atoms": [mesh("Stroke"), atom("stroke"), atom("cerebrovascular accident")],
        "atm_whole": [("Stroke", "MeSH")],
        "metamap": {
            "stroke": [("Stroke", 1000, "MSH")],
            "cerebrovascular accident": [("Stroke", 942, "MSH")],
        },
    },
    "mri": {
        "atoms": [mesh("Magnetic Resonance Imaging"), atom("mri"), atom("magnetic resonance")],
        "atm_whole": [("Magnetic Resonance Imaging", "MeSH")],
        "metamap": {
            "mri": [("Magnetic Resonance Imaging", 1000, "MSH")],
            "magnetic resonance": [("Magnetic Resonance Imaging", 968, "MSH")],
        },
    },
    "liverneo": {
        "atoms": [mesh("Liver Neoplasms"), atom("liver cancer"), trunc("hepatic tumor")],
        "atm_whole": [("Liver Neoplasms", "MeSH"), ("Carcinoma, Hepatocellular", "MeSH")],
        "metamap": {
            "liver cancer": [("Liver Neoplasms", 1000, "MSH")],
            "hepatic tumor": [("Liver Neoplasms", 850, "MSH"), ("Neoplasms", 600, "MSH")],
        },
    },
    "liverbiopsy": {
        "atoms": [mesh("Biopsy"), trunc("liver biops"), atom("needle biopsy")],
        "atm_whole": [("Biopsy", "MeSH"), ("Biopsy, Needle", "MeSH")],
        "metamap": {
            "liver biops": [("Liver", 861, "MSH"), ("Biopsy", 827, "MSH")],
            "needle biopsy": [("Biopsy, Needle", 1000, "MSH"), ("Biopsy", 760, "MSH")],
        },
    },
    "exercise": {
        "atoms": [mesh("Exercise"), atom("exercise"), atom("physical activity")],
        "atm_whole": [("Exercise", "MeSH")],
        "metamap": {
            "exercise": [("Exercise", 1000, "MSH")],
            "physical activity": [("Exercise", 915, "MSH")],
        },
    },
    "depression": {
        "atoms": [mesh("Depression"), trunc("depress"), atom("low mood")],
        "atm_whole": [("Depression", "MeSH")],
        "metamap": {
            "depress": [("Depression", 977, "MSH")],
            "low mood": [("Depression", 745, "MSH")],
        },
    },
    "smoking": {
        "atoms": [mesh("Smoking Cessation"), atom("quit smoking"), atom("smoking cessation")],
        "atm_whole": [("Smoking Cessation", "MeSH"), ("Smoking", "MeSH")],
        "metamap": {
            "quit smoking": [("Smoking Cessation", 924, "MSH"), ("Smoking", 689, "MSH")],
            "smoking cessation": [("Smoking Cessation", 1000, "MSH")],
        },
    },
    "survey": {
        "atoms": [mesh("Surveys and Questionnaires"), atom("survey"), trunc("questionnaire")],
        "atm_whole": [("Surveys and Questionnaires", "MeSH")],
        "metamap": {
            "survey": [("Surveys and Questionnaires", 858, "MSH"), ("Persons", 310, "MSH")],
            "questionnaire": [("Surveys and Questionnaires", 941, "MSH")],
        },
    },
    "massscreen": {
        "atoms": [mesh("Mass Screening"), atom("screening"), atom("early detection")],
        "atm_whole": [("Mass Screening", "MeSH")],
        "metamap": {
            "screening": [("Mass Screening", 740, "MSH")],
            "early detection": [("Mass Screening", 802, "MSH")],
        },
    },
    "eye": {
        "atoms": [mesh("Eye"), atom("eye"), atom("ocular")],
        "atm_whole": [("Eye", "MeSH"), ("Head", "MeSH")],
        "metamap": {
            "eye": [("Eye", 1000, "MSH")],
            "ocular": [("Eye", 871, "MSH")],
        },
    },
    "portalhtn": {
        "atoms": [mesh("Hypertension, Portal"), atom("portal hypertension")],
        "atm_whole": [("Hypertension, Portal", "MeSH")],
        "metamap": {
            "portal hypertension": [
                ("Hypertension, Portal", 1000, "MSH"),
                ("Hypertension", 833, "MSH"),
            ],
        },
    },
}


def theme_node(name):
    theme = THEMES[name]
    if "node" in theme:
        return theme["node"]
    atoms = theme["atoms"]
    return atoms[0] if len(atoms) == 1 else op("OR", *atoms)


# ---------------------------------------------------------------------------
# Topics: hand query text plus hand AST from theme composition.
# T1..T3 are evaluation topics (with qrels); T4..T20 are the training split.

TOPIC_THEMES = {
    "T1": ["eit", "livercirr", "biopsy_needle"],
    "T2": ["fattyliver", "obesity"],
    "T3": ["hcc", "ultrasound", "screen_not"],
    "T4": ["diabetes2", "obesity"],
    "T5": ["htn", "aspirin", "stroke"],
    "T6": ["mri", "liverneo"],
    "T7": ["exercise", "depression"],
    "T8": ["smoking", "survey"],
    "T9": ["massscreen", "hcc", "ultrasound"],
    "T10": ["diabetes2", "exercise", "survey"],
    "T11": ["stroke", "htn"],
    "T12": ["liverneo", "liverbiopsy", "mri"],
    "T13": ["depression", "survey"],
    "T14": ["eye", "massscreen"],
    "T15": ["portalhtn", "livercirr", "ultrasound"],
    "T16": ["aspirin", "diabetes2", "htn"],
    "T17": ["obesity", "exercise", "depression", "survey"],
    "T18": ["fattyliver", "mri", "liverneo"],
    "T19": ["smoking", "stroke", "htn"],
    "T20": ["eye", "ultrasound", "massscreen"],
}

TOPIC_QUERIES = {
    "T1": (
        '("Elasticity Imaging Techniques"[Mesh] OR "transient elastograph*" OR fibroscan)'
        ' AND ("Liver Cirrhosis"[Mesh] OR ((hepatic OR liver) AND (fibrosis OR cirrhosis)))'
        ' AND ("liver biops*" OR "Biopsy, Needle"[Mesh])'
    ),
    "T2": (
        '("Fatty Liver"[Mesh:NoExp] OR "fatty liver" OR steatosis)'
        ' AND (Obesity[Mesh] OR obes* OR "body mass index")'
    ),
    "T3": (
        '("Carcinoma, Hepatocellular"[Mesh] OR "hepatocellular carcinoma" OR hcc)'
        " AND (Ultrasonography[Mesh] OR ultrasound OR sonograph*)"
        " AND (screening NOT autopsy)"
    ),
    "T4": (
        '("Diabetes Mellitus, Type 2"[Mesh] OR "type 2 diabetes" OR t2dm)'
        ' AND (Obesity[Mesh] OR obes* OR "body mass index")'
    ),
    "T5": (
        '(Hypertension[Mesh] OR "high blood pressure" OR hypertens*)'
        ' AND (Aspirin[Mesh] OR aspirin OR "acetylsalicylic acid")'
        ' AND (Stroke[Mesh] OR stroke OR "cerebrovascular accident")'
    ),
    "T6": (
        '("Magnetic Resonance Imaging"[Mesh] OR mri OR "magnetic resonance")'
        ' AND ("Liver Neoplasms"[Mesh] OR "liver cancer" OR "hepatic tumor*")'
    ),
    "T7": (
        '(Exercise[Mesh] OR exercise OR "physical activity")'
        ' AND (Depression[Mesh] OR depress* OR "low mood")'
    ),
    "T8": (
        '("Smoking Cessation"[Mesh] OR "quit smoking" OR "smoking cessation")'
        ' AND ("Surveys and Questionnaires"[Mesh] OR survey OR questionnaire*)'
    ),
    "T9": (
        '("Mass Screening"[Mesh] OR screening OR "early detection")'
        ' AND ("Carcinoma, Hepatocellular"[Mesh] OR "hepatocellular carcinoma" OR hcc)'
        " AND (Ultrasonography[Mesh] OR ultrasound OR sonograph*)"
    ),
    "T10": (
        '("Diabetes Mellitus, Type 2"[Mesh] OR "type 2 diabetes" OR t2dm)'
        ' AND (Exercise[Mesh] OR exercise OR "physical activity")'
        ' AND ("Surveys and Questionnaires"[Mesh] OR survey OR questionnaire*)'
    ),
    "T11": (
        '(Stroke[Mesh] OR stroke OR "cerebrovascular accident")'
        ' AND (Hypertension[Mesh] OR "high blood pressure" OR hypertens*)'
    ),
    "T12": (
        '("Liver Neoplasms"[Mesh] OR "liver cancer" OR "hepatic tumor*")'
        ' AND (Biopsy[Mesh] OR "liver biops*" OR "needle biopsy")'
        ' AND ("Magnetic Resonance Imaging"[Mesh] OR mri OR "magnetic resonance")'
    ),
    "T13": (
        '(Depression[Mesh] OR depress* OR "low mood")'
        ' AND ("Surveys and Questionnaires"[Mesh] OR survey OR questionnaire*)'
    ),
    "T14": (
        "(Eye[Mesh] OR eye OR ocular)"
        ' AND ("Mass Screening"[Mesh] OR screening OR "early detection")'
    ),
    "T15": (
        '("Hypertension, Portal"[Mesh] OR "portal hypertension")'
        ' AND ("Liver Cirrhosis"[Mesh] OR ((hepatic OR liver) AND (fibrosis OR cirrhosis)))'
        " AND (Ultrasonography[Mesh] OR ultrasound OR sonograph*)"
    ),
    "T16": (
        '(Aspirin[Mesh] OR aspirin OR "acetylsalicylic acid")'
        ' AND ("Diabetes Mellitus, Type 2"[Mesh] OR "type 2 diabetes" OR t2dm)'
        ' AND (Hypertension[Mesh] OR "high blood pressure" OR hypertens*)'
    ),
    "T17": (
        '(Obesity[Mesh] OR obes* OR "body mass index")'
        ' AND (Exercise[Mesh] OR exercise OR "physical activity")'
        ' AND (Depression[Mesh] OR depress* OR "low mood")'
        ' AND ("Surveys and Questionnaires"[Mesh] OR survey OR questionnaire*)'
    ),
    "T18": (
        '("Fatty Liver"[Mesh:NoExp] OR "fatty liver" OR steatosis)'
        ' AND ("Magnetic Resonance Imaging"[Mesh] OR mri OR "magnetic resonance")'
        ' AND ("Liver Neoplasms"[Mesh] OR "liver cancer" OR "hepatic tumor*")'
    ),
    "T19": (
        '("Smoking Cessation"[Mesh] OR "quit smoking" OR "smoking cessation")'
        ' AND (Stroke[Mesh] OR stroke OR "cerebrovascular accident")'
        ' AND (Hypertension[Mesh] OR "high blood pressure" OR hypertens*)'
    ),
    "T20": (
        "(Eye[Mesh] OR eye OR ocular)"
        " AND (Ultrasonography[Mesh] OR ultrasound OR sonograph*)"
        ' AND ("Mass Screening"[Mesh] OR screening OR "early detection")'
    ),
}

EVAL_TOPICS = ("T1", "T2", "T3")


def topic_ast(topic_id):
    nodes = [theme_node(name) for name in TOPIC_THEMES[topic_id]]
    return nodes[0] if len(nodes) == 1 else op("AND", *nodes)


# ---------------------------------------------------------------------------
# Documents. Text for T1-T3 clusters is written against the topic
# predicates; comments mark the docs with pinned roles.

DOCS = [
    # --- T1 cluster: elastography / cirrhosis / liver biopsy
    ("d01", "Transient elastography compared with liver biopsy for staging hepatic fibrosis",
     "We compared fibroscan readings with percutaneous liver biopsy in a cirrhosis cohort.",
     ["Elasticity Imaging Techniques", "Liver Cirrhosis", "Biopsy, Needle"], "2017-05-10"),
    # matches T1 through MeSH headings only: lost when MeSH is stripped
    ("d02", "Noninvasive staging accuracy revisited",
     "Staging accuracy of noninvasive approaches was assessed against reference standards.",
     ["Elasticity Imaging Techniques", "Liver Cirrhosis", "Biopsy, Needle"], "2016-03-12"),
    ("d03", "Fibroscan accuracy for liver fibrosis assessment",
     "Percutaneous liver biopsies were compared with fibroscan in patients with suspected cirrhosis.",
     [], "2018-09-01"),
    ("d04", "Hepatic venous pressure gradient measurement in portal hypertension",
     "Pressure gradients correlated with liver fibrosis stage in the catheterisation cohort.",
     ["Liver Cirrhosis"], "2015-06-20"),
    ("d05", "Shear wave measurements in chronic hepatic disease",
     "Stiffness cut-offs identified cirrhosis; hepatic decompensation was tracked for two years.",
     ["Elasticity Imaging Techniques", "Biopsy, Needle"], "2019-02-14"),
    # matches T1 but published after the 2020-12-31 cutoff
    ("d06", "Transient elastography and liver biopsy in the post-pandemic era",
     "Fibroscan referrals recovered while liver biopsy volumes stayed low in cirrhosis care.",
     ["Elasticity Imaging Techniques", "Liver Cirrhosis"], "2021-07-01"),
    # retrieved by T1 but absent from the qrels (unjudged)
    ("d07", "Fibroscan thresholds for cirrhosis detection",
     "Liver fibrosis thresholds were validated against liver biopsy in three centres.",
     ["Fibrosis"], "2018-11-11"),
    ("d08", "Liver biopsy complications after transient elastography referral",
     "Bleeding after liver biopsy was rare; fibrosis staging pathways were audited.",
     [], "2014-08-30"),
    ("d09", "Autotaxin as a serum marker of hepatic fibrosis",
     "Serum markers tracked fibrosis progression without imaging or biopsy.",
     ["Fibrosis"], "2016-01-05"),
    # reaches T1 fragment 2 only through explosion of Liver Cirrhosis
    ("d10", "Congenital hepatic disorders assessed with fibroscan",
     "Stiffness measurements preceded liver biopsy confirmation in paediatric cohorts.",
     ["Congenital Hepatic Fibrosis"], "2019-10-02"),
    # --- T2 cluster: fatty liver / obesity
    ("d11", "Hepatic steatosis prevalence in obesity clinics",
     "Fatty liver disease burden rose with body mass index across sites.",
     ["Fatty Liver", "Obesity"], "2016-04-18"),
    ("d12", "Fatty liver and obesity in adolescents",
     "Steatosis correlated with body mass index in the school cohort.",
     [], "2017-08-22"),
    # fragment 2 satisfied only through explosion of Obesity
    ("d13", "Bariatric outcomes and steatosis regression",
     "Steatosis regressed twelve months after surgery in most participants.",
     ["Obesity, Morbid"], "2018-12-05"),
    ("d14", "Alcoholic liver injury patterns",
     "Histology distinguished alcoholic injury from other causes.",
     ["Liver Diseases"], "2015-03-09"),
    ("d15", "Obesity stigma in fatty liver clinics",
     "Interviews explored weight stigma; no imaging outcomes were collected.",
     [], "2019-06-30"),
    ("d16", "Steatosis screening with body mass index adjustment",
     "Fatty liver indices were recalibrated for ancestry and age.",
     [], "2020-02-02"),
    ("d17", "Weight loss effects on hepatic fat",
     "Obese participants lowered liver fat after a structured programme.",
     ["Fatty Liver"], "2014-10-01"),
    # carries only the descendant heading: separates exploded from :NoExp
    ("d18", "Alcoholic fatty liver disease progression",
     "Abstinence altered the trajectory of alcohol related steatosis.",
     ["Fatty Liver, Alcoholic"], "2017-01-15"),
    # --- T3 cluster: hepatocellular carcinoma / ultrasound / screening NOT autopsy
    ("d19", "Ultrasound surveillance for hepatocellular carcinoma",
     "A regional screening programme tracked nodule detection rates.",
     ["Carcinoma, Hepatocellular", "Ultrasonography"], "2016-09-14"),
    # excluded from T3 by the NOT clause
    ("d20", "Hepatocellular carcinoma screening findings at autopsy",
     "Sonographic surveillance misses were quantified in an autopsy series.",
     ["Carcinoma, Hepatocellular"], "2015-11-30"),
    ("d21", "Sonographic screening for hcc in cirrhotic patients",
     "Hepatocellular carcinoma incidence under ultrasound screening was estimated.",
     [], "2018-04-03"),
    ("d22", "Ultrasound screening intervals for liver cancer",
     "Hepatocellular carcinoma detection rates differed by interval length.",
     ["Liver Neoplasms"], "2019-07-19"),
    ("d23", "Cost analysis of hcc ultrasound screening",
     "Programme costs per detected case were modelled for three strategies.",
     [], "2017-02-27"),
    ("d24", "Surveillance imaging adherence in at-risk cohorts",
     "Screening adherence varied with travel distance and clinic reminders.",
     ["Carcinoma, Hepatocellular", "Ultrasonography"], "2020-05-08"),
    ("d25", "Alpha fetoprotein trends in liver malignancy",
     "Serum markers complemented imaging in longitudinal follow-up.",
     ["Liver Neoplasms"], "2014-06-06"),
    # fragment 2 satisfied only through explosion of Ultrasonography
    ("d26", "Doppler patterns in hcc screening",
     "Flow signatures of small nodules were catalogued prospectively.",
     ["Ultrasonography, Doppler"], "2019-12-12"),
    # --- training-topic documents (one per topic, T4..T20)
    ("d27", "Type 2 diabetes remission after weight management",
     "Obese adults with t2dm entered a supervised programme; body mass index fell.",
     ["Diabetes Mellitus, Type 2", "Obesity"], "2018-06-15"),
    ("d28", "Aspirin for primary stroke prevention in hypertension",
     "High blood pressure patients took acetylsalicylic acid daily.",
     ["Hypertension", "Aspirin", "Stroke"], "2016-11-08"),
    ("d29", "Magnetic resonance characterisation of hepatic tumors",
     "Mri sequences distinguished liver cancer subtypes.",
     ["Magnetic Resonance Imaging", "Liver Neoplasms"], "2019-03-21"),
    ("d30", "Exercise therapy for depression in primary care",
     "Physical activity prescriptions lowered low mood scores.",
     ["Exercise", "Depression"], "2017-04-11"),
    ("d31", "Quit smoking programmes evaluated by postal survey",
     "Smoking cessation rates were self reported by questionnaire.",
     ["Smoking Cessation", "Surveys and Questionnaires"], "2015-09-29"),
    ("d32", "Early detection of hepatocellular carcinoma with ultrasound",
     "Screening uptake and hcc stage at diagnosis were linked.",
     ["Mass Screening", "Carcinoma, Hepatocellular", "Ultrasonography"], "2018-01-25"),
    ("d33", "Physical activity surveys in type 2 diabetes",
     "T2dm participants completed an exercise questionnaire annually.",
     ["Diabetes Mellitus, Type 2", "Exercise", "Surveys and Questionnaires"], "2019-08-07"),
    ("d34", "Stroke incidence under intensive blood pressure control",
     "Cerebrovascular accident rates fell with hypertension treatment.",
     ["Stroke", "Hypertension"], "2016-06-02"),
    ("d35", "Needle biopsy versus mri for liver cancer diagnosis",
     "Hepatic tumors underwent magnetic resonance imaging before liver biopsies.",
     ["Liver Neoplasms", "Biopsy", "Magnetic Resonance Imaging"], "2017-10-16"),
    ("d36", "Questionnaire screening for depression in clinics",
     "A two item survey flagged low mood for follow-up.",
     ["Depression", "Surveys and Questionnaires"], "2018-02-14"),
    ("d37", "Ocular screening in diabetic eye clinics",
     "Eye examinations detected disease before symptoms appeared.",
     ["Eye", "Mass Screening"], "2019-05-23"),
    ("d38", "Portal hypertension grading with ultrasound elastography",
     "Liver cirrhosis severity tracked portal pressure estimates.",
     ["Hypertension, Portal", "Liver Cirrhosis", "Ultrasonography"], "2020-03-03"),
    ("d39", "Aspirin use among adults with type 2 diabetes",
     "Acetylsalicylic acid prescribing varied with hypertension status.",
     ["Aspirin", "Diabetes Mellitus, Type 2", "Hypertension"], "2015-12-18"),
    ("d40", "Obesity, exercise, and low mood: a cohort survey",
     "Body mass index, physical activity, and depression scores were collected by questionnaire.",
     ["Obesity", "Exercise", "Depression", "Surveys and Questionnaires"], "2018-07-30"),
    ("d41", "Magnetic resonance quantification of steatosis",
     "Mri proton density fat fraction graded fatty liver without biopsy; no malignancy was found.",
     ["Fatty Liver", "Magnetic Resonance Imaging"], "2019-11-05"),
    ("d42", "Smoking cessation after stroke: blood pressure outcomes",
     "Quit smoking support lowered hypertension burden after cerebrovascular accident.",
     ["Smoking Cessation", "Stroke", "Hypertension"], "2017-07-09"),
    ("d43", "Ocular ultrasound screening for retinal detachment",
     "Eye clinics piloted sonographic early detection pathways.",
     ["Eye", "Ultrasonography", "Mass Screening"], "2020-09-12"),
    # --- background documents
    ("d44", "Vitamin D supplementation in elderly women",
     "Bone density outcomes were followed for five years.",
     [], "2022-01-20"),
    ("d45", "Sleep quality questionnaire validation study",
     "A new survey instrument was validated against actigraphy.",
     ["Surveys and Questionnaires"], "2016-08-19"),
    ("d46", "Air pollution and childhood asthma incidence",
     "Exposure models linked particulates to new diagnoses.",
     [], "2018-05-27"),
    ("d47", "Hospital noise levels and staff fatigue",
     "Sound monitoring across wards informed quiet protocols.",
     [], "2015-02-11"),
    ("d48", "Green tea consumption and cognition",
     "No association was found in the prospective arm.",
     [], "2019-09-16"),
    ("d49", "Helmet use among urban cyclists",
     "Observational counts before and after an awareness campaign.",
     [], "2014-04-22"),
    ("d50", "Telemedicine uptake in rural clinics",
     "Video consultations rose sharply after reimbursement changes.",
     [], "2020-10-28"),
]

QRELS = {
    "T1": {"d01": 1, "d02": 1, "d03": 1, "d04": 1, "d05": 1, "d06": 1, "d09": 1,
           "d10": 1, "d08": 0, "d30": 0, "d44": 0},
    "T2": {"d11": 1, "d12": 1, "d13": 1, "d14": 1, "d17": 1, "d15": 0, "d18": 0,
           "d45": 0},
    "T3": {"d19": 1, "d20": 1, "d21": 1, "d24": 1, "d25": 1, "d26": 1, "d23": 0,
           "d46": 0},
}


# ---------------------------------------------------------------------------
# Emission


def write_lines(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def emit_corpus():
    write_lines(FIXTURES / "corpus" / "mesh_tree.tsv",
                [f"{heading}\t{number}" for heading, number in MESH_TREE])
    write_lines(
        FIXTURES / "corpus" / "documents.jsonl",
        [json.dumps({"doc_id": d, "title": t, "abstract": a,
                     "mesh_headings": m, "pub_date": p}, sort_keys=True)
         for d, t, a, m, p in DOCS],
    )
    write_lines(
        FIXTURES / "corpus" / "descriptions.jsonl",
        [json.dumps({"heading": h, "description": d}, sort_keys=True)
         for h, d in sorted(DESCRIPTIONS.items())],
    )
    qrel_lines = []
    for topic_id in sorted(QRELS):
        for doc_id in sorted(QRELS[topic_id]):
            qrel_lines.append(f"{topic_id} 0 {doc_id} {QRELS[topic_id][doc_id]}")
    write_lines(FIXTURES / "corpus" / "qrels.txt", qrel_lines)

    write_lines(
        FIXTURES / "corpus" / "topics.jsonl",
        [json.dumps({"topic_id": t, "query": TOPIC_QUERIES[t]}, sort_keys=True)
         for t in EVAL_TOPICS],
    )
    train_ids = [t for t in TOPIC_QUERIES if t not in EVAL_TOPICS]
    train_ids.sort(key=lambda t: int(t[1:]))
    write_lines(
        FIXTURES / "corpus" / "train_topics.jsonl",
        [json.dumps({"topic_id": t, "query": TOPIC_QUERIES[t]}, sort_keys=True)
         for t in train_ids],
    )


def emit_umls():
    write_lines(FIXTURES / "umls" / "conso.psv", [f"{c}|{s}|{t}" for c, s, t in CONSO])
    write_lines(FIXTURES / "umls" / "def.psv", [f"{c}|{d}" for c, d in DEFS])
    write_lines(FIXTURES / "umls" / "sty.psv", [f"{c}|{s}" for c, s in STYS])
    write_lines(FIXTURES / "umls" / "rel.psv", [f"{a}|{r}|{b}" for a, r, b in RELS])


def emit_golden_queries():
    out = FIXTURES / "golden_queries"
    out.mkdir(parents=True, exist_ok=True)
    for i, topic_id in enumerate(sorted(TOPIC_QUERIES, key=lambda t: int(t[1:])), 1):
        (out / f"q{i:02d}.txt").write_text(TOPIC_QUERIES[topic_id] + "\n", encoding="utf-8")
        (out / f"q{i:02d}.ast.json").write_text(
            json.dumps(topic_ast(topic_id), indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )


def emit_replay():
    """Replay files, keyed by the exact strings the retrieval stage submits.

    Mapper services return headings lowercased; the package groups headings
    case-insensitively, so the casing carries no information downstream.
    """
    sys.path.insert(0, str(ROOT / "src"))
    from meshsuggest.boolquery import node_from_json, serialize_query
    from meshsuggest.fragments import fragment, strip_mesh

    atm: dict = {}
    metamap: dict = {}

    def add(store, key, mappings):
        if key in store and store[key] != mappings:
            raise SystemExit(f"conflicting replay entries for {key!r}")
        store[key] = mappings

    for name, theme in THEMES.items():
        node = node_from_json(theme_node(name))
        frag = fragment(node, "X")[0]
        whole_key = serialize_query(strip_mesh(frag))
        add(atm, whole_key, [
            {"heading": h.lower(), "score": None, "category": cat, "source": None}
            for h, cat in theme["atm_whole"]
        ])
        for clause_key, mappings in theme.get("atm_clauses", {}).items():
            add(atm, clause_key, [
                {"heading": h.lower(), "score": None, "category": cat, "source": None}
                for h, cat in mappings
            ])
        for term_key, mappings in theme.get("atm_terms", {}).items():
            add(atm, term_key, [
                {"heading": h.lower(), "score": None, "category": cat, "source": None}
                for h, cat in mappings
            ])
        for clause_text, mappings in theme["metamap"].items():
            add(metamap, clause_text, [
                {"heading": h.lower(), "score": score, "category": None, "source": source}
                for h, score, source in mappings
            ])

    write_lines(
        FIXTURES / "replay" / "atm.jsonl",
        [json.dumps({"input": k, "mappings": v}, sort_keys=True) for k, v in sorted(atm.items())],
    )
    write_lines(
        FIXTURES / "replay" / "metamap.jsonl",
        [json.dumps({"input": k, "mappings": v}, sort_keys=True)
         for k, v in sorted(metamap.items())],
    )


def self_check():
    """Fail loudly if the hand data drifted out of sync with the package."""
    sys.path.insert(0, str(ROOT / "src"))
    from meshsuggest.boolquery import node_to_json, parse_query
    from meshsuggest.corpus import ingest_mesh_tree, ingest_umls_tables
    from meshsuggest.fragments import fragment
    from meshsuggest.retrieval import ReplayMapperClient, retrieve_atm, retrieve_metamap, retrieve_umls

    total_fragments = 0
    for topic_id, query in TOPIC_QUERIES.items():
        parsed = node_to_json(parse_query(query))
        if parsed != topic_ast(topic_id):
            raise SystemExit(f"{topic_id}: hand AST does not match the parsed query")
        total_fragments += len(fragment(parse_query(query), topic_id))
    mean = total_fragments / len(TOPIC_QUERIES)
    if abs(mean - 2.65) > 1e-9:
        raise SystemExit(f"fragment mean is {mean}, expected 2.65")

    tree = ingest_mesh_tree(FIXTURES / "corpus" / "mesh_tree.tsv")
    concepts = ingest_umls_tables(*[FIXTURES / "umls" / f for f in
                                    ("conso.psv", "def.psv", "sty.psv", "rel.psv")])
    atm_client = ReplayMapperClient(FIXTURES / "replay" / "atm.jsonl")
    mm_client = ReplayMapperClient(FIXTURES / "replay" / "metamap.jsonl")
    heading_set = {h.lower() for h, _ in MESH_TREE}
    for topic_id, query in TOPIC_QUERIES.items():
        for frag in fragment(parse_query(query), topic_id):
            candidates = list(retrieve_atm(frag, atm_client))
            candidates += retrieve_metamap(frag, mm_client)
            candidates += retrieve_umls(frag, concepts)
            for c in candidates:
                if c.heading.lower() not in heading_set:
                    raise SystemExit(f"candidate {c.heading!r} missing from the MeSH tree")
                if c.heading.lower() not in {k.lower() for k in DESCRIPTIONS}:
                    raise SystemExit(f"candidate {c.heading!r} has no description")
    print(f"self-check ok: {len(TOPIC_QUERIES)} topics, {total_fragments} fragments, "
          f"mean {mean:.2f} fragments/query")


def main():
    emit_corpus()
    emit_umls()
    emit_golden_queries()
    emit_replay()
    self_check()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
