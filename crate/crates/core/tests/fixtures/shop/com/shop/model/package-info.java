/**
 * Domain Model types.
 */
package com.shop.model;
