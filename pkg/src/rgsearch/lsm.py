"""Built-in schema of the LSM breast-cancer metastasis datasets and their risk-factor subsets."""
from .data import Column, Schema

LSM_COLUMNS = (
    ("race", ("white", "black", "Asian", "American Indian or Alaskan native",
              "native Hawaiian or other Pacific islander")),
    ("ethnicity", ("not Hispanic", "Hispanic")),
    ("smoking", ("ex smoker", "non smoker", "cigarettes", "chewing tobacco", "cigar")),
    ("alcohol_usage", ("moderate", "no use", "use but nos", "former user", "heavy user")),
    ("family_history", ("cancer", "no cancer", "breast cancer", "other cancer", "cancer but nos")),
    ("age_at_diagnosis", ("0-49", "50-69", ">69")),
    ("menopausal_status", ("pre", "post")),
    ("side", ("left", "right")),
    ("TNEG", ("yes", "no")),
    ("ER", ("neg", "pos", "low pos")),
    ("ER_percent", ("0-20", "20-90", "90-100")),
    ("PR", ("neg", "pos", "low pos")),
    ("PR_percent", ("0-20", "20-90", "90-100")),
    ("P53", ("neg", "pos", "low pos")),
    ("HER2", ("neg", "pos")),
    ("t_tnm_stage", ("0", "1", "2", "3", "4", "IS", "1mic", "X")),
    ("n_tnm_stage", ("0", "1", "2", "3", "4", "X")),
    ("stage", ("0", "1", "2", "3")),
    ("lymph_nodes_removed", ("0-11", "12-22", ">22")),
    ("lymph_nodes_positive", ("0", "1-8", ">8")),
    ("lymph_node_status", ("neg", "pos")),
    ("histology", ("lobular", "duct")),
    ("size", ("0-32", "32-70", ">70")),
    ("grade", ("1", "2", "3")),
    ("invasive", ("yes", "no")),
    ("histology2", ("IDC", "DCIS", "ILC", "NC")),
    ("invasive_tumor_location", ("mixed duct and lobular", "duct", "lobular", "none")),
    ("DCIS_level", ("solid", "apocrine", "cribriform", "dcis", "comedo", "papillary", "micropapillary")),
    ("re_excision", ("yes", "no")),
    ("surgical_margins", ("res. tumor", "no res. tumor", "no primary site surgery")),
    ("MRI_s_60_surgery", ("yes", "no")),
)

LSM_SCHEMA = Schema(tuple(Column(n, c) for n, c in LSM_COLUMNS), outcome="metastasis")

RISK_FACTORS = {
    "5year": (
        "race", "smoking", "family_history", "age_at_diagnosis", "TNEG", "ER", "ER_percent",
        "PR", "PR_percent", "P53", "HER2", "t_tnm_stage", "n_tnm_stage", "stage",
        "lymph_nodes_positive", "histology", "size", "invasive_tumor_location", "DCIS_level",
        "surgical_margins",
    ),
    "10year": (
        "ethnicity", "smoking", "alcohol_usage", "family_history", "age_at_diagnosis", "TNEG",
        "ER", "ER_percent", "PR", "PR_percent", "HER2", "n_tnm_stage", "stage",
        "lymph_nodes_positive", "histology", "grade", "DCIS_level", "surgical_margins",
    ),
    "15year": (
        "race", "alcohol_usage", "age_at_diagnosis", "menopausal_status", "ER", "ER_percent",
        "t_tnm_stage", "n_tnm_stage", "stage", "lymph_node_status", "size", "grade",
        "histology2", "invasive_tumor_location", "re_excision", "surgical_margins", "histology",
    ),
}

# case counts: (total, positive, negative)
LSM_COUNTS = {
    "5year": (4189, 437, 3752),
    "10year": (1827, 572, 1255),
    "15year": (751, 608, 143),
}
