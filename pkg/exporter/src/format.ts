// Binary interchange layout shared with the Python auditing package:
// a JSON manifest next to two flat little-endian payload files,
// <stem>.f32 (row-major float32 logits) and <stem>.labels.u32 (uint32 labels).
// The consumer validates byte sizes against the manifest before reading,
// so the writer is explicit about endianness instead of trusting the host.

import * as fs from 'fs'
import * as path from 'path'

export interface DatasetManifest {
  num_samples: number
  num_classes: number
  model_id: string
  dataset_id: string
  class_names: string[] | null
  endianness: 'little'
  logits_file: string
  labels_file: string
}

export interface ExportedDataset {
  manifest: DatasetManifest
  logits: Float32Array // length num_samples * num_classes, row-major
  labels: Uint32Array // length num_samples
}

function floatsLE(values: Float32Array): Buffer {
  const buf = Buffer.alloc(4 * values.length)
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], 4 * i)
  }
  return buf
}

function uintsLE(values: Uint32Array): Buffer {
  const buf = Buffer.alloc(4 * values.length)
  for (let i = 0; i < values.length; i++) {
    buf.writeUInt32LE(values[i], 4 * i)
  }
  return buf
}

/**
 * Write one dataset into outDir as `<stem>.json` + payload files.
 * Returns the manifest path.
 */
export function writeDataset(
  outDir: string,
  stem: string,
  logits: Float32Array,
  labels: Uint32Array,
  numClasses: number,
  modelId: string,
  datasetId: string,
  classNames: string[] | null = null,
): string {
  const numSamples = labels.length
  if (logits.length !== numSamples * numClasses) {
    throw new Error(
      `logit buffer has ${logits.length} values, expected ` +
        `${numSamples} x ${numClasses} = ${numSamples * numClasses}`,
    )
  }
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] >= numClasses) {
      throw new Error(`label ${labels[i]} out of range [0, ${numClasses}) at row ${i}`)
    }
  }
  if (classNames !== null && classNames.length !== numClasses) {
    throw new Error(`${classNames.length} class names for ${numClasses} classes`)
  }

  const manifest: DatasetManifest = {
    num_samples: numSamples,
    num_classes: numClasses,
    model_id: modelId,
    dataset_id: datasetId,
    class_names: classNames,
    endianness: 'little',
    logits_file: `${stem}.f32`,
    labels_file: `${stem}.labels.u32`,
  }

  fs.mkdirSync(outDir, { recursive: true })
  fs.writeFileSync(path.join(outDir, manifest.logits_file), floatsLE(logits))
  fs.writeFileSync(path.join(outDir, manifest.labels_file), uintsLE(labels))
  const manifestPath = path.join(outDir, `${stem}.json`)
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n')
  return manifestPath
}

/** Read a manifest + payloads back, applying the same checks the consumer does. */
export function readDataset(manifestPath: string): ExportedDataset {
  const manifest = JSON.parse(fs.readFileSync(manifestPath, 'utf-8')) as DatasetManifest
  for (const key of [
    'num_samples',
    'num_classes',
    'model_id',
    'dataset_id',
    'endianness',
    'logits_file',
    'labels_file',
  ]) {
    if (!(key in manifest)) throw new Error(`${manifestPath}: manifest missing '${key}'`)
  }
  if (manifest.endianness !== 'little') {
    throw new Error(`${manifestPath}: unsupported endianness '${manifest.endianness}'`)
  }
  const n = manifest.num_samples
  const k = manifest.num_classes
  if (!Number.isInteger(n) || !Number.isInteger(k) || n <= 0 || k <= 0) {
    throw new Error(`${manifestPath}: num_samples/num_classes must be positive integers`)
  }
  const dir = path.dirname(manifestPath)
  const logitBytes = fs.readFileSync(path.join(dir, manifest.logits_file))
  const labelBytes = fs.readFileSync(path.join(dir, manifest.labels_file))
  if (logitBytes.length !== 4 * n * k) {
    throw new Error(
      `${manifest.logits_file}: payload is ${logitBytes.length} bytes, ` +
        `manifest implies ${4 * n * k}`,
    )
  }
  if (labelBytes.length !== 4 * n) {
    throw new Error(
      `${manifest.labels_file}: payload is ${labelBytes.length} bytes, ` +
        `manifest implies ${4 * n}`,
    )
  }
  const logits = new Float32Array(n * k)
  for (let i = 0; i < logits.length; i++) logits[i] = logitBytes.readFloatLE(4 * i)
  const labels = new Uint32Array(n)
  for (let i = 0; i < labels.length; i++) {
    labels[i] = labelBytes.readUInt32LE(4 * i)
    if (labels[i] >= k) {
      throw new Error(`${manifest.labels_file}: label ${labels[i]} out of range at row ${i}`)
    }
  }
  return { manifest, logits, labels }
}
