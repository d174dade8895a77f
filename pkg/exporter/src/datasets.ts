import { mulberry32, gaussian, randInt, Rng } from './rng'

// Built-in procedural image datasets. Each sample is generated from a
// seeded stream in one canonical order, so row i of a split is the same
// image and label on every run and for every model.

export interface DatasetSpec {
  name: string
  classes: number
  height: number
  width: number
  trainSize: number
  testSize: number
  seed: number
  noise: number
  render: (label: number, rng: Rng, pixels: Float32Array, h: number, w: number) => void
}

export interface Split {
  images: Float32Array
  labels: Int32Array
  n: number
  height: number
  width: number
  classes: number
}

const STRIPE_CLASSES = 6
const BLOB_CLASSES = 5

function renderStripes(label: number, rng: Rng, pixels: Float32Array, h: number, w: number) {
  // sinusoidal grating; orientation encodes the class
  const theta = (Math.PI * label) / STRIPE_CLASSES
  const freq = (2 * Math.PI * 2.5) / w
  const phase = rng() * 2 * Math.PI
  const cx = Math.cos(theta)
  const cy = Math.sin(theta)
  for (let y = 0; y < h; ++y) {
    for (let x = 0; x < w; ++x) {
      pixels[y * w + x] = 0.5 + 0.4 * Math.sin(freq * (x * cx + y * cy) + phase)
    }
  }
}

function renderBlobs(label: number, rng: Rng, pixels: Float32Array, h: number, w: number) {
  // one bright gaussian bump; its position on a circle encodes the class
  const angle = (2 * Math.PI * label) / BLOB_CLASSES
  const cy = h / 2 + (h / 3.2) * Math.sin(angle) + gaussian(rng) * 0.4
  const cx = w / 2 + (w / 3.2) * Math.cos(angle) + gaussian(rng) * 0.4
  const s2 = 2 * 1.6 * 1.6
  for (let y = 0; y < h; ++y) {
    for (let x = 0; x < w; ++x) {
      const d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx)
      pixels[y * w + x] = 0.1 + 0.85 * Math.exp(-d2 / s2)
    }
  }
}

export const DATASETS: Record<string, DatasetSpec> = {
  stripes: {
    name: 'stripes',
    classes: STRIPE_CLASSES,
    height: 12,
    width: 12,
    trainSize: 800,
    testSize: 500,
    seed: 12,
    noise: 0.12,
    render: renderStripes,
  },
  blobs: {
    name: 'blobs',
    classes: BLOB_CLASSES,
    height: 10,
    width: 10,
    trainSize: 600,
    testSize: 400,
    seed: 31,
    noise: 0.1,
    render: renderBlobs,
  },
}

export const SPLITS = ['train', 'test'] as const
export type SplitName = (typeof SPLITS)[number]

export function datasetSpec(name: string): DatasetSpec {
  const spec = DATASETS[name]
  if (!spec) {
    throw new Error(`unknown dataset '${name}'; built-ins: ${Object.keys(DATASETS).join(', ')}`)
  }
  return spec
}

/**
 * Generate one split of a built-in dataset. The full sample stream is
 * regenerated from the seed and sliced, so 'test' rows never depend on
 * whether 'train' was also requested.
 */
export function loadSplit(dataset: string, split: SplitName): Split {
  const spec = datasetSpec(dataset)
  if (!SPLITS.includes(split)) {
    throw new Error(`unknown split '${split}'; expected one of: ${SPLITS.join(', ')}`)
  }
  const rng = mulberry32(spec.seed)
  const total = spec.trainSize + spec.testSize
  const { height: h, width: w, classes } = spec
  const images = new Float32Array(total * h * w)
  const labels = new Int32Array(total)
  const pixels = new Float32Array(h * w)
  for (let i = 0; i < total; ++i) {
    const label = randInt(rng, classes)
    labels[i] = label
    spec.render(label, rng, pixels, h, w)
    for (let p = 0; p < h * w; ++p) {
      let v = pixels[p] + spec.noise * gaussian(rng)
      if (v < 0) v = 0
      if (v > 1) v = 1
      images[i * h * w + p] = v
    }
  }
  const start = split === 'train' ? 0 : spec.trainSize
  const n = split === 'train' ? spec.trainSize : spec.testSize
  return {
    images: images.slice(start * h * w, (start + n) * h * w),
    labels: labels.slice(start, start + n),
    n,
    height: h,
    width: w,
    classes,
  }
}
