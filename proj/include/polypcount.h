/* polypcount — polyp counting via tracklet re-association.
 *
 * C interface to the shared library. All functions return a pc_status;
 * PC_OK means success. On failure pc_last_error() returns a thread-local
 * message describing what went wrong. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with pc_string_free.
 */
#ifndef POLYPCOUNT_H
#define POLYPCOUNT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PC_API __declspec(dllexport)
#else
#define PC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pc_status {
    PC_OK = 0,
    PC_ERROR_CONFIG = 2,        /* invalid configuration or arguments */
    PC_ERROR_DATA = 3,          /* parse failure or inconsistent data */
    PC_ERROR_NONCONVERGENCE = 4,/* strict mode only */
    PC_ERROR_INTERNAL = 5
} pc_status;

typedef struct pc_dataset pc_dataset;       /* annotations grouped into tracklets */
typedef struct pc_embeddings pc_embeddings; /* frame- or tracklet-level vectors */

PC_API const char* pc_version(void);

/* Message for the most recent failing call on this thread. */
PC_API const char* pc_last_error(void);

PC_API void pc_string_free(char* s);

/* --- datasets ------------------------------------------------------- */

/* Loads a JSON Lines annotation file and builds ground-truth tracklets
 * with the given IoU link threshold (pass 0.1 for the standard rule). */
PC_API pc_status pc_dataset_load(const char* annotations_path, double iou_min,
                                 pc_dataset** out);

/* Generates a synthetic dataset; synth_config_json mirrors the "synth"
 * section of the run config. Both outputs are optional (pass NULL). */
PC_API pc_status pc_dataset_synthesize(const char* synth_config_json,
                                       pc_dataset** out_dataset,
                                       pc_embeddings** out_embeddings);

PC_API void pc_dataset_free(pc_dataset* dataset);

PC_API size_t pc_dataset_video_count(const pc_dataset* dataset);

/* Per-video tracklet and entity counts plus the No-ReID fragmentation
 * rates, as a JSON document. */
PC_API pc_status pc_dataset_summary_json(const pc_dataset* dataset, char** out_json);

/* --- embeddings ------------------------------------------------------ */

PC_API pc_status pc_embeddings_load(const char* path, pc_embeddings** out);
PC_API pc_status pc_embeddings_save(const pc_embeddings* embeddings, const char* path);
PC_API void pc_embeddings_free(pc_embeddings* embeddings);

/* --- clustering and evaluation -------------------------------------- */

/* Runs the per-video pipeline (aggregate, distances, normalize, cluster)
 * for one video. options_json may set metric, stride, normalization and
 * clustering (same schema as the run config). Returns the assignment as
 * JSON: {"video_id": ..., "clusters": {...}, "converged": bool}. */
PC_API pc_status pc_cluster_video(const pc_dataset* dataset,
                                  const pc_embeddings* embeddings,
                                  const char* video_id, const char* options_json,
                                  char** out_assignment_json);

/* Clusters every video of the dataset (or of the manifest split named in
 * the options) and returns the evaluation report as JSON. */
PC_API pc_status pc_evaluate(const pc_dataset* dataset,
                             const pc_embeddings* embeddings,
                             const char* options_json, char** out_report_json);

/* --- commands --------------------------------------------------------- */

/* Runs one CLI-grade command: "tracklets", "synth", "cluster", "sweep",
 * "eval", "report" or "sample". config_json mirrors the run config file.
 * Commands that produce console text return it via out_text (optional). */
PC_API pc_status pc_run_command(const char* command, const char* config_json,
                                char** out_text);

/* --- small numeric helpers ------------------------------------------- */

/* Intersection over union of two boxes given as [x_min, y_min, x_max, y_max]. */
PC_API pc_status pc_iou(const double a[4], const double b[4], double* out);

/* Cross-tracklet sampling probability at a training step; pass NULL for the
 * default schedule (1.0 -> 0.5 over the first 75% of steps). */
PC_API pc_status pc_alpha_schedule(int64_t step, int64_t total_steps,
                                   const char* sampling_config_json, double* out);

#ifdef __cplusplus
}
#endif

#endif /* POLYPCOUNT_H */
