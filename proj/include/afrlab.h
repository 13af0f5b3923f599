/* afrlab — answer-first relevance lab.
 *
 * C interface to the afrlab core: a synthetic rule-based relevance task,
 * a strict gated trajectory reward, a slot-factored softmax policy trained
 * with hybrid SFT + group-relative policy optimization under a curriculum
 * schedule, a KL-identity verification lab, and the ranking metric suite.
 *
 * Conventions:
 *   - Functions return AFRLAB_OK (0) on success or a nonzero status code;
 *     afrlab_last_error() describes the most recent failure on the calling
 *     thread.
 *   - `config_json` arguments accept either inline JSON (first character
 *     '{') or a path to a JSON file.
 *   - String outputs are written into caller-provided buffers; if the
 *     buffer is too small the function fails with AFRLAB_ERR_BUFFER and
 *     reports the required size via afrlab_last_error().
 */

#ifndef AFRLAB_H
#define AFRLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define AFRLAB_OK 0
#define AFRLAB_ERR_INVALID 1 /* bad arguments / invalid input data */
#define AFRLAB_ERR_CONFIG 2  /* malformed or inconsistent configuration */
#define AFRLAB_ERR_NUMERIC 3 /* non-finite loss or gradient; run aborted */
#define AFRLAB_ERR_IO 4      /* file could not be read or written */
#define AFRLAB_ERR_BUFFER 5  /* output buffer too small */

/* Library version string, e.g. "afrlab 0.1.0". */
const char* afrlab_version(void);

/* Message for the last failure on this thread; empty string if none. */
const char* afrlab_last_error(void);

/* ---- experiment entry points (file based) ------------------------------ */

/* Generates a dataset per the config's "world" block and "n_instances",
 * writing one instance per line (features, checkpoints, label, long-tail
 * flag) to out_jsonl. */
int afrlab_gen_data(const char* config_json, const char* out_jsonl);

/* Runs the full training protocol (cold-start SFT, staged RL per the
 * config's mode/sampling) and writes runlog.jsonl/runlog.csv/steps.csv
 * plus parameter checkpoints into out_dir. */
int afrlab_train(const char* config_json, const char* out_dir);

/* Runs the config once per (mode, sampling) pair listed in the config's
 * "ablate" array (e.g. [{"mode":"pure_grpo"},{"mode":"mode_balanced"}]),
 * sharing world and seed, and writes ablation.csv / ablation_summary.json
 * plus one runlog per arm into out_dir. */
int afrlab_ablate(const char* config_json, const char* out_dir);

/* Distills the teacher given by the config's "distill" block into a
 * student policy; writes student_params.json and distill_report.json. */
int afrlab_distill(const char* config_json, const char* out_dir);

/* Numerically verifies the KL identities, Gibbs optimality, and the
 * mode-covering/mode-seeking fit dichotomy; writes the JSON report and,
 * when traces_csv_path is non-NULL, the fit-trace CSV. */
int afrlab_kl_lab(const char* report_json_path, const char* traces_csv_path);

/* Evaluates the metric suite over a prediction JSONL file (one record per
 * line: query_id, y_true, y_pred, score). Writes a metrics JSON block; when
 * per_class_csv_path is non-NULL also writes the per-class P/R/F1 table. */
int afrlab_eval_file(const char* predictions_jsonl,
                     const char* metrics_json_path,
                     const char* per_class_csv_path);

/* ---- trajectory utilities ---------------------------------------------- */

/* Renders the canonical trajectory text for a decision label (0..4), five
 * checkpoint answers (0 = No, 1 = Yes, steps 4..8 in order), and the final
 * label. */
int afrlab_render_trajectory(int y_dec, const int checkpoints[5], int y_final,
                             char* out_text, size_t out_cap);

/* Parses trajectory text. On success writes a JSON object
 * {"y_dec":..,"checkpoints":[..],"y_final":..}; on format violation writes
 * {"error":"<stable code>"} and still returns AFRLAB_OK (the parse itself
 * is total; only argument errors fail). */
int afrlab_parse_trajectory(const char* text, char* out_json, size_t out_cap);

/* Scores trajectory text against a ground-truth label under the reward
 * config (NULL for defaults). Writes the gate/reward breakdown as one JSON
 * object (the JSONL audit record). */
int afrlab_score_trajectory(const char* text, int y_gt,
                            const char* reward_config_json, char* out_json,
                            size_t out_cap);

/* ---- policy handles ----------------------------------------------------- */

typedef struct afrlab_policy afrlab_policy;

/* Loads serialized policy parameters (JSON with shape header). */
int afrlab_policy_load(const char* path, afrlab_policy** out);

int afrlab_policy_save(const afrlab_policy* policy, const char* path);

void afrlab_policy_free(afrlab_policy* policy);

/* Decision-slot distribution for one feature vector: writes the 5 label
 * probabilities and the weighted expected score. */
int afrlab_policy_decision(const afrlab_policy* policy, const double* features,
                           size_t feature_dim, double out_probs[5],
                           double* out_score);

/* Greedy slot tokens (decision, 5 checkpoints, final) for a feature
 * vector; out_tokens must hold 7 ints. */
int afrlab_policy_greedy(const afrlab_policy* policy, const double* features,
                         size_t feature_dim, int out_tokens[7]);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AFRLAB_H */
