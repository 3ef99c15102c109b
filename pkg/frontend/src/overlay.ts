/**
 * Canvas mask overlay: the candidate frame with its predicted mask
 * tinted on top at an adjustable opacity.
 *
 * Rendering degrades gracefully: environments without a 2D canvas (or
 * before the images arrive) simply show nothing, and the review flow
 * never depends on the drawing having happened.
 */

export const OVERLAY_TINT = { r: 255, g: 64, b: 64 };

/** Tint an alpha-style mask image into a colored RGBA buffer. */
export function tintMask(data: Uint8ClampedArray, opacity: number): Uint8ClampedArray {
  const out = new Uint8ClampedArray(data.length);
  const alpha = Math.max(0, Math.min(1, opacity));
  for (let i = 0; i < data.length; i += 4) {
    const on = data[i] > 127 ? 1 : 0;
    out[i] = OVERLAY_TINT.r;
    out[i + 1] = OVERLAY_TINT.g;
    out[i + 2] = OVERLAY_TINT.b;
    out[i + 3] = Math.round(on * alpha * 255);
  }
  return out;
}

export class MaskOverlay {
  private image: HTMLImageElement | null = null;
  private mask: HTMLImageElement | null = null;
  opacity = 0.45;

  constructor(private readonly canvas: HTMLCanvasElement) {}

  setSources(imageUrl: string, maskUrl: string): void {
    this.image = this.loadImage(imageUrl);
    this.mask = this.loadImage(maskUrl);
  }

  setOpacity(opacity: number): void {
    this.opacity = Math.max(0, Math.min(1, opacity));
    this.draw();
  }

  private loadImage(url: string): HTMLImageElement {
    const img = new Image();
    img.onload = () => this.draw();
    img.src = url;
    return img;
  }

  draw(): void {
    const { image, mask } = this;
    if (!image || !image.complete || image.naturalWidth === 0) return;
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    this.canvas.width = image.naturalWidth;
    this.canvas.height = image.naturalHeight;
    ctx.drawImage(image, 0, 0);
    if (!mask || !mask.complete || mask.naturalWidth === 0) return;

    const scratch = document.createElement('canvas');
    scratch.width = mask.naturalWidth;
    scratch.height = mask.naturalHeight;
    const mctx = scratch.getContext('2d');
    if (!mctx) return;
    mctx.drawImage(mask, 0, 0);
    const pixels = mctx.getImageData(0, 0, scratch.width, scratch.height);
    pixels.data.set(tintMask(pixels.data, this.opacity));
    mctx.putImageData(pixels, 0, 0);
    ctx.drawImage(scratch, 0, 0, this.canvas.width, this.canvas.height);
  }
}
