"""Reference numbers for the 16-project JIRA story point benchmark.

These are previously reported results bundled for side-by-side comparison
in experiment reports. They are never used in any computation.

PROJECT_STATS maps project name to (item count, min story point, max story
point). REFERENCE_RESULTS maps model key to per-project (pearson, spearman,
mae) tuples; mae is None for models whose scores are unitless. The "average"
row is the across-project mean as originally reported.
"""

from __future__ import annotations

MODEL_REGRESSION = "regression"
MODEL_COMPARATIVE_NOVAL = "comparative-noval"
MODEL_COMPARATIVE_VAL = "comparative-val"
MODEL_SVM_COMPARATIVE = "svm-comparative"

EXPERIMENT_MODELS = (
    MODEL_REGRESSION,
    MODEL_COMPARATIVE_NOVAL,
    MODEL_COMPARATIVE_VAL,
    MODEL_SVM_COMPARATIVE,
)

# Comparative models emit unitless scores, so MAE is not defined for them.
MODELS_WITH_MAE = (MODEL_REGRESSION,)

DISPLAY_NAMES = {
    MODEL_REGRESSION: "SBERT-Regression",
    MODEL_COMPARATIVE_NOVAL: "SBERT-Comparative (without validation)",
    MODEL_COMPARATIVE_VAL: "SBERT-Comparative (with validation)",
    MODEL_SVM_COMPARATIVE: "LinearSVM-Comparative",
    "fasttext-svm": "FastText-SVM",
    "gpt2sp": "GPT2SP",
}

PROJECT_STATS = {
    "appceleratorstudio": (2919, 1, 40),
    "aptanastudio": (829, 1, 40),
    "bamboo": (521, 1, 20),
    "clover": (384, 1, 40),
    "datamanagement": (4667, 1, 100),
    "duracloud": (666, 1, 16),
    "jirasoftware": (352, 1, 20),
    "mesos": (1680, 1, 40),
    "moodle": (1166, 1, 100),
    "mule": (889, 1, 21),
    "mulestudio": (732, 1, 34),
    "springxd": (3526, 1, 40),
    "talenddataquality": (1381, 1, 40),
    "talendesb": (868, 1, 13),
    "titanium": (2251, 1, 34),
    "usergrid": (482, 1, 8),
}

PROJECT_NAMES = tuple(PROJECT_STATS)

REFERENCE_RESULTS = {
    "fasttext-svm": {
        "appceleratorstudio": (0.3019, 0.2812, 1.4443),
        "aptanastudio": (0.1808, 0.1669, 3.4687),
        "bamboo": (0.1352, 0.1160, 0.8425),
        "clover": (0.3223, 0.2026, 3.6959),
        "datamanagement": (0.3640, 0.4354, 5.8862),
        "duracloud": (0.3252, 0.3089, 0.7085),
        "jirasoftware": (0.2576, 0.1599, 1.7541),
        "mesos": (0.3182, 0.3141, 1.1013),
        "moodle": (0.1893, 0.1712, 7.2921),
        "mule": (0.2266, 0.2536, 2.4483),
        "mulestudio": (0.2076, 0.1856, 3.6092),
        "springxd": (0.3920, 0.4231, 1.6833),
        "talenddataquality": (0.2370, 0.2281, 3.3422),
        "talendesb": (0.4419, 0.4641, 0.8134),
        "titanium": (0.1086, 0.1059, 2.2120),
        "usergrid": (0.2265, 0.2891, 1.1840),
        "average": (0.2647, 0.2566, 2.5929),
    },
    "gpt2sp": {
        "appceleratorstudio": (0.1665, 0.1489, 1.1288),
        "aptanastudio": (-0.0442, 0.0050, 2.2506),
        "bamboo": (0.0401, 0.1449, 0.6118),
        "clover": (0.1477, 0.2668, 2.2477),
        "datamanagement": (0.5217, 0.3410, 3.8146),
        "duracloud": (0.0459, 0.2669, 0.5697),
        "jirasoftware": (0.0433, 0.1213, 1.3050),
        "mesos": (0.2651, 0.3227, 0.8894),
        "moodle": (0.2799, 0.4291, 5.3546),
        "mule": (0.1593, 0.1785, 1.7313),
        "mulestudio": (-0.1373, -0.1150, 1.5632),
        "springxd": (0.2146, 0.2261, 1.2182),
        "talenddataquality": (0.3504, 0.4097, 1.7789),
        "talendesb": (0.4820, 0.4161, 0.4507),
        "titanium": (0.1297, 0.1582, 2.0910),
        "usergrid": (0.3049, 0.3851, 0.4911),
        "average": (0.1856, 0.2316, 1.7185),
    },
    MODEL_REGRESSION: {
        "appceleratorstudio": (0.3254, 0.3037, 3.5821),
        "aptanastudio": (0.3419, 0.2830, 5.8345),
        "bamboo": (0.1768, 0.1753, 0.8148),
        "clover": (0.4403, 0.4166, 3.8337),
        "datamanagement": (0.3775, 0.3909, 7.0462),
        "duracloud": (0.3758, 0.4221, 0.8064),
        "jirasoftware": (0.5324, 0.4987, 2.3916),
        "mesos": (0.3960, 0.3916, 1.5414),
        "moodle": (0.3499, 0.3552, 5.9245),
        "mule": (0.2342, 0.2459, 3.3713),
        "mulestudio": (0.1096, 0.0612, 5.6180),
        "springxd": (0.3982, 0.3911, 2.0790),
        "talenddataquality": (0.2892, 0.2985, 2.3418),
        "talendesb": (0.3453, 0.3550, 0.9979),
        "titanium": (0.1861, 0.2264, 3.8560),
        "usergrid": (0.2016, 0.1981, 1.6888),
        "average": (0.3175, 0.3133, 3.2330),
    },
    MODEL_SVM_COMPARATIVE: {
        "appceleratorstudio": (0.2904, 0.2786, None),
        "aptanastudio": (0.2497, 0.1680, None),
        "bamboo": (0.2516, 0.2114, None),
        "clover": (0.4059, 0.3834, None),
        "datamanagement": (0.3389, 0.3974, None),
        "duracloud": (0.3593, 0.3792, None),
        "jirasoftware": (0.4522, 0.4463, None),
        "mesos": (0.4156, 0.4218, None),
        "moodle": (0.2794, 0.3169, None),
        "mule": (0.2209, 0.2392, None),
        "mulestudio": (0.1616, 0.1654, None),
        "springxd": (0.3888, 0.3867, None),
        "talenddataquality": (0.3015, 0.2949, None),
        "talendesb": (0.4007, 0.4180, None),
        "titanium": (0.1828, 0.2519, None),
        "usergrid": (0.2895, 0.2764, None),
        "average": (0.3118, 0.3147, None),
    },
    MODEL_COMPARATIVE_NOVAL: {
        "appceleratorstudio": (0.3330, 0.3222, None),
        "aptanastudio": (0.3452, 0.2682, None),
        "bamboo": (0.1860, 0.1761, None),
        "clover": (0.4190, 0.4483, None),
        "datamanagement": (0.3271, 0.3794, None),
        "duracloud": (0.3858, 0.4006, None),
        "jirasoftware": (0.4414, 0.4386, None),
        "mesos": (0.4359, 0.4402, None),
        "moodle": (0.2929, 0.3276, None),
        "mule": (0.3188, 0.3235, None),
        "mulestudio": (0.2265, 0.2148, None),
        "springxd": (0.4066, 0.4041, None),
        "talenddataquality": (0.2983, 0.2973, None),
        "talendesb": (0.4189, 0.4528, None),
        "titanium": (0.2098, 0.2439, None),
        "usergrid": (0.2945, 0.3075, None),
        "average": (0.3337, 0.3403, None),
    },
    MODEL_COMPARATIVE_VAL: {
        "appceleratorstudio": (0.2958, 0.2866, None),
        "aptanastudio": (0.3027, 0.2400, None),
        "bamboo": (0.0876, 0.0953, None),
        "clover": (0.4190, 0.4006, None),
        "datamanagement": (0.3021, 0.3864, None),
        "duracloud": (0.3829, 0.3939, None),
        "jirasoftware": (0.4915, 0.4442, None),
        "mesos": (0.4053, 0.4271, None),
        "moodle": (0.3301, 0.3574, None),
        "mule": (0.2306, 0.2498, None),
        "mulestudio": (0.2605, 0.2413, None),
        "springxd": (0.3984, 0.4155, None),
        "talenddataquality": (0.2363, 0.2393, None),
        "talendesb": (0.4165, 0.4567, None),
        "titanium": (0.1945, 0.1881, None),
        "usergrid": (0.3020, 0.3059, None),
        "average": (0.3160, 0.3205, None),
    },
}

# Reference across-project average Spearman for the best comparative setup
# (no validation, one pair per item), with the acceptance band used when a
# user replays the benchmark with their own sentence-embedding files.
REFERENCE_AVERAGE_SPEARMAN = 0.34
REFERENCE_AVERAGE_BAND = 0.05


def reference_for(model: str, project: str):
    """(pearson, spearman, mae) reference tuple or None when unavailable."""
    table = REFERENCE_RESULTS.get(model)
    if table is None:
        return None
    return table.get(project)
