// Dataset sources for the exporter.  Everything is materialised up front as
// one flat Float32Array (n * h * w * c) plus labels; the sizes involved are
// checkpoint-smoke-test scale, not training scale.

import * as fs from 'fs'
import * as path from 'path'

export interface ImageSource {
  datasetId: string
  shape: [number, number, number] // [h, w, c] per sample
  images: Float32Array // n * h * w * c
  labels: Uint32Array
  classNames: string[] | null
}

// mulberry32: tiny seedable PRNG, plenty for synthetic pixels
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

/**
 * Seeded synthetic images: background noise plus a class-dependent bright
 * stripe, so different labels genuinely produce different activations.
 * Labels cycle 0..numClasses-1.
 */
export function syntheticSource(
  shape: [number, number, number],
  numClasses: number,
  count: number,
  seed: number,
): ImageSource {
  const [h, w, c] = shape
  const rand = mulberry32(seed)
  const images = new Float32Array(count * h * w * c)
  const labels = new Uint32Array(count)
  const pixelsPer = h * w * c
  for (let i = 0; i < count; i++) {
    const label = i % numClasses
    labels[i] = label
    const base = i * pixelsPer
    for (let p = 0; p < pixelsPer; p++) {
      images[base + p] = 0.25 * rand()
    }
    const stripeRow = label % h
    for (let col = 0; col < w * c; col++) {
      images[base + stripeRow * w * c + col] += 0.75
    }
  }
  const classNames = Array.from({ length: numClasses }, (_, j) => `class_${j}`)
  return { datasetId: 'synthetic', shape, images, labels, classNames }
}

/**
 * Pre-generated images from a directory of raw float32 files.  Each file is
 * one sample (little-endian, h*w*c values) named `<anything>_<label>.f32`;
 * files are taken in sorted order.
 */
export function directorySource(dir: string, shape: [number, number, number]): ImageSource {
  const [h, w, c] = shape
  const pixelsPer = h * w * c
  const files = fs
    .readdirSync(dir)
    .filter(f => f.endsWith('.f32') || f.endsWith('.bin'))
    .sort()
  if (files.length === 0) {
    throw new Error(`${dir}: no .f32/.bin sample files found`)
  }
  const images = new Float32Array(files.length * pixelsPer)
  const labels = new Uint32Array(files.length)
  files.forEach((name, i) => {
    const m = /_(\d+)\.(f32|bin)$/.exec(name)
    if (!m) {
      throw new Error(`${name}: cannot parse label; expected '<stem>_<label>.f32'`)
    }
    labels[i] = parseInt(m[1], 10)
    const bytes = fs.readFileSync(path.join(dir, name))
    if (bytes.length !== 4 * pixelsPer) {
      throw new Error(
        `${name}: ${bytes.length} bytes, expected ${4 * pixelsPer} for shape ${shape.join('x')}`,
      )
    }
    for (let p = 0; p < pixelsPer; p++) {
      images[i * pixelsPer + p] = bytes.readFloatLE(4 * p)
    }
  })
  return {
    datasetId: path.basename(path.resolve(dir)),
    shape,
    images,
    labels,
    classNames: null,
  }
}

/**
 * Resolve a --dataset argument: the built-in 'synthetic' id, or a path to a
 * directory of pre-generated samples.
 */
export function loadSource(
  id: string,
  shape: [number, number, number],
  numClasses: number,
  opts: { count: number; seed: number },
): ImageSource {
  if (id === 'synthetic') {
    return syntheticSource(shape, numClasses, opts.count, opts.seed)
  }
  if (fs.existsSync(id) && fs.statSync(id).isDirectory()) {
    return directorySource(id, shape)
  }
  throw new Error(`unknown dataset '${id}' (use 'synthetic' or a directory of .f32 samples)`)
}
