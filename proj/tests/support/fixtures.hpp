#pragma once

namespace kgen::testsupport {

// RMSNorm sketch with tiled two-pass structure, parallel/pipeline hints and
// semantic alloc hints. Shared by parser, interpreter and pipeline tests.
inline constexpr const char* kRmsNormSketch = R"(sketch rms_norm_optimized {
  symbols: B, F, D1, D2;
  tensors: X[B, F, D1, D2]: f32; Y[B, F, D1, D2]: f32;
  constexpr: eps, TILE_SIZE;

  # Reduce parallel dimensions, only parallelize on batch and D1 dimensions
  @llm_hint("parallel", "coreidx")
  for b in range(B):
    @llm_hint("parallel", "coreidx")
    for d1_outer in range(0, ceil(D1, TILE_SIZE)):

      # Allocate memory for each D2 dimension
      square_sum = alloc([TILE_SIZE, D2], llm_hint=["fast", "accumulator", "init_zero"])

      # First pass: compute sum of squares, fully unroll on D2 dimension
      @llm_hint("pipeline")
      for f in range(F):
        # Load entire row data, reduce memory access count
        x_row = alloc([TILE_SIZE, D2], llm_hint=["fast", "input_cache"])
        load(X[b, f, d1_outer*TILE_SIZE:(d1_outer+1)*TILE_SIZE, 0:D2] -> x_row)

        # Compute square and accumulate
        square_row = alloc([TILE_SIZE, D2], llm_hint=["fastest", "temp_workspace"])
        mul(x_row, x_row, square_row)
        add(square_sum, square_row, square_sum)

      # Compute RMS
      mean_row = alloc([TILE_SIZE, D2], llm_hint=["fastest", "temp_workspace"])
      rms_row = alloc([TILE_SIZE, D2], llm_hint=["fastest", "temp_workspace"])
      div(square_sum, F, mean_row)
      add(mean_row, eps, mean_row)
      sqrt(mean_row, rms_row)

      # Second pass: normalize and store
      @llm_hint("pipeline")
      for f in range(F):
        # Load entire row of input data
        x_row = alloc([TILE_SIZE, D2], llm_hint=["fast", "input_cache"])
        load(X[b, f, d1_outer*TILE_SIZE:(d1_outer+1)*TILE_SIZE, 0:D2] -> x_row)

        # Normalization computation
        y_row = alloc([TILE_SIZE, D2], llm_hint=["fast", "output_buffer"])
        div(x_row, rms_row, y_row)

        # Store entire row result
        store(y_row -> Y[b, f, d1_outer*TILE_SIZE:(d1_outer+1)*TILE_SIZE, 0:D2])
}
)";

// Identity copy over a 1-D tensor: one loop, no hints.
inline constexpr const char* kIdentitySketch = R"(sketch identity_copy {
  symbols: N;
  tensors: X[N]: f32; Y[N]: f32;
  constexpr:;

  for i in range(N):
    v = alloc([1])
    load(X[i] -> v)
    store(v -> Y[i])
}
)";

}  // namespace kgen::testsupport
