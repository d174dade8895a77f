import * as tf from '@tensorflow/tfjs'
import path from 'path'
import { loadSplit, SplitName, SPLITS } from './datasets'
import { loadModelJson } from './model'
import { writeDatasetCsv } from './csv'

export type EmitKind = 'probabilities' | 'logits'

export interface ExportSpec {
  /** path to a layers-model JSON file (see model.ts) */
  model: string
  /** built-in dataset name */
  dataset: string
  split: SplitName
  out: string
  emit: EmitKind
  batchSize: number
}

export interface ExportResult {
  rows: number
  classes: number
  out: string
  modelName: string
}

/**
 * Stable softmax over each row of a logits buffer, in float64, with one
 * exact renormalization pass so every row sums to 1 up to a few ulp.
 */
export function softmaxRows(logits: Float64Array, n: number, k: number): Float64Array {
  const out = new Float64Array(n * k)
  for (let i = 0; i < n; ++i) {
    const off = i * k
    let m = -Infinity
    for (let j = 0; j < k; ++j) {
      if (logits[off + j] > m) m = logits[off + j]
    }
    let s = 0
    for (let j = 0; j < k; ++j) {
      const e = Math.exp(logits[off + j] - m)
      out[off + j] = e
      s += e
    }
    let s2 = 0
    for (let j = 0; j < k; ++j) {
      out[off + j] /= s
      s2 += out[off + j]
    }
    for (let j = 0; j < k; ++j) {
      out[off + j] /= s2
    }
  }
  return out
}

/**
 * Run the classifier over one dataset split in canonical order and write
 * the per-sample class scores as a dataset CSV with the labels inline.
 *
 * The model is expected to output one real-valued score (logit) per
 * class; emit 'probabilities' applies the softmax here, emit 'logits'
 * writes the raw outputs and leaves the softmax to the consumer.
 */
export async function exportProbabilities(spec: ExportSpec): Promise<ExportResult> {
  if (!['probabilities', 'logits'].includes(spec.emit)) {
    throw new Error(`emit kind must be 'probabilities' or 'logits', got '${spec.emit}'`)
  }
  if (!SPLITS.includes(spec.split)) {
    throw new Error(`unknown split '${spec.split}'; expected one of: ${SPLITS.join(', ')}`)
  }
  if (!Number.isInteger(spec.batchSize) || spec.batchSize < 1) {
    throw new Error(`batch size must be a positive integer, got ${spec.batchSize}`)
  }

  const split = loadSplit(spec.dataset, spec.split)
  const { model, meta } = await loadModelJson(spec.model)

  const inShape = model.inputs[0].shape
  const expect = [split.height, split.width, 1]
  if (inShape.length !== 4 || inShape.slice(1).some((d, i) => d !== expect[i])) {
    throw new Error(
      `model expects input shape ${JSON.stringify(inShape)}, ` +
        `dataset '${spec.dataset}' provides [null,${expect.join(',')}]`,
    )
  }
  const outShape = model.outputs[0].shape
  const K = outShape[outShape.length - 1]
  if (K !== split.classes) {
    throw new Error(
      `model outputs ${K} classes, dataset '${spec.dataset}' declares ${split.classes}`,
    )
  }

  const { n, height: h, width: w } = split
  const raw = new Float64Array(n * K)
  for (let start = 0; start < n; start += spec.batchSize) {
    const end = Math.min(start + spec.batchSize, n)
    const m = end - start
    const batchOut = tf.tidy(() => {
      const input = tf.tensor4d(split.images.subarray(start * h * w, end * h * w), [m, h, w, 1])
      const out = model.predict(input) as tf.Tensor
      return out.dataSync()
    })
    for (let p = 0; p < m * K; ++p) {
      raw[start * K + p] = batchOut[p]
    }
  }
  model.dispose()

  const values = spec.emit === 'probabilities' ? softmaxRows(raw, n, K) : raw
  const modelName =
    typeof meta.name === 'string' && meta.name
      ? meta.name
      : path.basename(spec.model, path.extname(spec.model))
  writeDatasetCsv(spec.out, {
    values,
    labels: split.labels,
    n,
    classes: K,
    kind: spec.emit,
    extras: { model_name: modelName, dataset: spec.dataset, split: spec.split },
  })
  return { rows: n, classes: K, out: spec.out, modelName }
}
