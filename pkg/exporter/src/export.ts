import * as tf from '@tensorflow/tfjs'

import { ImageSource, loadSource } from './data'
import { DatasetManifest, writeDataset } from './format'
import { INPUT_SHAPE, NUM_CLASSES, buildModel } from './model'

export interface ExportOptions {
  model: string
  dataset: string
  out: string
  batch: number
  count?: number
  seed?: number
}

export interface ExportResult {
  manifestPath: string
  numSamples: number
  numClasses: number
}

/**
 * Run the model over the source in batches of `batch` and collect the raw
 * logit rows.  The output tensor of every batch is checked against the
 * expected [batchSize, numClasses] shape so a wrong head fails loudly
 * instead of writing a garbled matrix.
 */
export function collectLogits(
  model: tf.LayersModel,
  source: ImageSource,
  batch: number,
): { logits: Float32Array; numClasses: number } {
  if (!Number.isInteger(batch) || batch <= 0) {
    throw new Error(`batch size must be a positive integer, got ${batch}`)
  }
  const [h, w, c] = source.shape
  const pixelsPer = h * w * c
  const n = source.labels.length
  let numClasses = -1
  let logits: Float32Array | null = null

  for (let start = 0; start < n; start += batch) {
    const stop = Math.min(n, start + batch)
    const rows = stop - start
    const batchLogits = tf.tidy(() => {
      const x = tf.tensor4d(
        source.images.subarray(start * pixelsPer, stop * pixelsPer),
        [rows, h, w, c],
      )
      const y = model.predict(x) as tf.Tensor
      if (y.shape.length !== 2 || y.shape[0] !== rows) {
        throw new Error(
          `model produced shape [${y.shape.join(', ')}] for a batch of ${rows} samples`,
        )
      }
      return y.dataSync() as Float32Array
    })
    if (numClasses === -1) {
      numClasses = batchLogits.length / rows
      logits = new Float32Array(n * numClasses)
    } else if (batchLogits.length !== rows * numClasses) {
      throw new Error(`class count changed between batches`)
    }
    logits!.set(batchLogits, start * numClasses)
  }
  for (let i = 0; i < logits!.length; i++) {
    if (!Number.isFinite(logits![i])) {
      throw new Error(`non-finite logit at flat index ${i}`)
    }
  }
  return { logits: logits!, numClasses }
}

export async function runExport(opts: ExportOptions): Promise<ExportResult> {
  await tf.setBackend('cpu')
  await tf.ready()

  const model = buildModel(opts.model, opts.seed ?? 1)
  const source = loadSource(opts.dataset, INPUT_SHAPE, NUM_CLASSES, {
    count: opts.count ?? 64,
    seed: (opts.seed ?? 1) + 1000,
  })
  const { logits, numClasses } = collectLogits(model, source, opts.batch)

  const stem = `${opts.model}__${source.datasetId}`.replace(/[^A-Za-z0-9_.-]+/g, '_')
  const manifestPath = writeDataset(
    opts.out,
    stem,
    logits,
    source.labels,
    numClasses,
    opts.model,
    source.datasetId,
    source.classNames,
  )
  model.dispose()
  return { manifestPath, numSamples: source.labels.length, numClasses }
}

export { DatasetManifest }
